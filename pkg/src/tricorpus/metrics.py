"""Corpus-level BLEU and ChrF++ plus per-direction/per-source report tables.

Tokenization is deliberately language-agnostic: text is split on
whitespace and every punctuation character becomes its own token, which
behaves identically across Cyrillic and Latin scripts.  BLEU uses no
smoothing (a zero aggregated precision zeroes the score); ChrF++ averages
character-order (1..6) and word-order (1..2) F2 scores.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

BLEU_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0


class MetricsError(Exception):
    pass


class EmptyInput(MetricsError):
    pass


@dataclass(frozen=True)
class EvalPair:
    hypothesis: str
    reference: str
    direction: tuple = ("und_Zyyy", "und_Zyyy")  # (src lang, tgt lang)
    source: str = "other"

    def __post_init__(self):
        if not self.reference:
            raise ValueError("reference must be non-empty")


def tokenize_words(text: str) -> list:
    """Whitespace split with every punctuation character as its own token."""
    tokens = []
    current = []
    for ch in text:
        if ch.isspace():
            if current:
                tokens.append("".join(current))
                current = []
        elif unicodedata.category(ch).startswith("P"):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


def _ngram_counts(items, order: int) -> Counter:
    return Counter(tuple(items[i:i + order]) for i in range(len(items) - order + 1))


def bleu_corpus(pairs) -> float:
    """Corpus BLEU in [0, 100]: clipped n-gram precisions for n=1..4 pooled
    over the corpus, geometric mean, and the standard brevity penalty."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no evaluation pairs")
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len = ref_len = 0
    for pair in pairs:
        hyp = tokenize_words(pair.hypothesis)
        ref = tokenize_words(pair.reference)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, BLEU_ORDER + 1):
            hyp_ngrams = _ngram_counts(hyp, n)
            ref_ngrams = _ngram_counts(ref, n)
            correct[n - 1] += sum((hyp_ngrams & ref_ngrams).values())
            total[n - 1] += max(len(hyp) - n + 1, 0)
    if any(c == 0 or t == 0 for c, t in zip(correct, total)):
        return 0.0
    log_precision = sum(math.log(c / t) for c, t in zip(correct, total)) / BLEU_ORDER
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_precision) * 100.0


def _char_ngram_stats(hyp: str, ref: str, order: int):
    hyp_ngrams = _ngram_counts(list(hyp), order)
    ref_ngrams = _ngram_counts(list(ref), order)
    match = sum((hyp_ngrams & ref_ngrams).values())
    return sum(hyp_ngrams.values()), sum(ref_ngrams.values()), match


def chrfpp_corpus(pairs, beta: float = CHRF_BETA) -> float:
    """ChrF++ in [0, 100]: mean of per-order F-beta over character orders
    1..6 (spaces removed) and word orders 1..2 (punctuation-split tokens),
    with precision/recall pooled over the corpus per order."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no evaluation pairs")
    n_orders = CHRF_CHAR_ORDER + CHRF_WORD_ORDER
    hyp_totals = [0] * n_orders
    ref_totals = [0] * n_orders
    matches = [0] * n_orders
    for pair in pairs:
        hyp_chars = "".join(pair.hypothesis.split())
        ref_chars = "".join(pair.reference.split())
        for n in range(1, CHRF_CHAR_ORDER + 1):
            h, r, m = _char_ngram_stats(hyp_chars, ref_chars, n)
            hyp_totals[n - 1] += h
            ref_totals[n - 1] += r
            matches[n - 1] += m
        hyp_words = tokenize_words(pair.hypothesis)
        ref_words = tokenize_words(pair.reference)
        for n in range(1, CHRF_WORD_ORDER + 1):
            idx = CHRF_CHAR_ORDER + n - 1
            hyp_ngrams = _ngram_counts(hyp_words, n)
            ref_ngrams = _ngram_counts(ref_words, n)
            hyp_totals[idx] += sum(hyp_ngrams.values())
            ref_totals[idx] += sum(ref_ngrams.values())
            matches[idx] += sum((hyp_ngrams & ref_ngrams).values())
    score = 0.0
    beta_sq = beta * beta
    for idx in range(n_orders):
        precision = matches[idx] / hyp_totals[idx] if hyp_totals[idx] else 0.0
        recall = matches[idx] / ref_totals[idx] if ref_totals[idx] else 0.0
        if precision + recall > 0.0:
            score += (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)
    return score / n_orders * 100.0


# ---------------------------------------------------------------------------
# Report tables
# ---------------------------------------------------------------------------

ALL_COLUMN = "All"


@dataclass
class ScoreCell:
    bleu: float
    chrfpp: float
    n: int


@dataclass
class ScoreReport:
    rows: dict  # direction label -> {column -> ScoreCell}
    columns: list

    def render(self) -> str:
        width = max([len(label) for label in self.rows] + [9])
        header = f"{'direction':<{width}}"
        for col in self.columns:
            header += f"  {col + ' BLEU':>12}  {col + ' ChrF++':>12}"
        lines = [header]
        for label, cells in self.rows.items():
            line = f"{label:<{width}}"
            for col in self.columns:
                cell = cells.get(col)
                if cell is None:
                    line += f"  {'-':>12}  {'-':>12}"
                else:
                    line += f"  {cell.bleu:>12.2f}  {cell.chrfpp:>12.2f}"
            lines.append(line)
        return "\n".join(lines)

    def to_json_obj(self) -> dict:
        return {
            "columns": self.columns,
            "rows": {
                label: {
                    col: {"bleu": round(cell.bleu, 2), "chrfpp": round(cell.chrfpp, 2), "n": cell.n}
                    for col, cell in cells.items()
                }
                for label, cells in self.rows.items()
            },
        }


def direction_label(direction: tuple) -> str:
    src, tgt = direction
    return f"{src.split('_')[0]}-{tgt.split('_')[0]}"


def _column_name(source: str) -> str:
    return source.capitalize()


def build_report(pairs) -> ScoreReport:
    """One row per direction; an All column scored over the concatenation of
    every source plus one column per source present."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no evaluation pairs")
    directions = []
    sources = []
    for pair in pairs:
        if pair.direction not in directions:
            directions.append(pair.direction)
        if pair.source not in sources:
            sources.append(pair.source)
    columns = [ALL_COLUMN] + [_column_name(s) for s in sources]
    rows = {}
    for direction in directions:
        dir_pairs = [p for p in pairs if p.direction == direction]
        cells = {ALL_COLUMN: ScoreCell(
            bleu=bleu_corpus(dir_pairs), chrfpp=chrfpp_corpus(dir_pairs), n=len(dir_pairs)
        )}
        for source in sources:
            sub = [p for p in dir_pairs if p.source == source]
            if sub:
                cells[_column_name(source)] = ScoreCell(
                    bleu=bleu_corpus(sub), chrfpp=chrfpp_corpus(sub), n=len(sub)
                )
        rows[direction_label(direction)] = cells
    return ScoreReport(rows=rows, columns=columns)
