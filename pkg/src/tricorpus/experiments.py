"""Holdout splitting, training-set assembly for the four experiment
configurations, and LLM-evaluation batch export/ingest.

The four standard configurations for a language triple (low-resource
language L, its partner language P, and a third language T):

  1. L<->P on all sources.
  2. adds L<->T, restricted to the religious sources.
  3. adds T<->P, same data as experiment 2.
  4. all six directions on all sources, with the back-translation source's
     missing T side supplied by synthetic translations.
"""

from __future__ import annotations

import csv
import random
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    ORIGIN_BACK_TRANSLATED,
    ORIGIN_ORIGINAL,
    Corpus,
    ParallelUnit,
    validate_lang_tag,
)

DEFAULT_SEED = 42
RELIGIOUS_SOURCES = ("bible", "quran")
ALL_SOURCES = ("bible", "quran", "qusar")

# Display names for prompt templating; unknown tags fall back to the tag.
LANGUAGE_NAMES = {
    "lez": "Lezgian",
    "rus": "Russian",
    "azj": "Azerbaijani",
    "eng": "English",
    "tur": "Turkish",
    "ava": "Avar",
    "che": "Chechen",
}

PROMPT_TEMPLATE = (
    "This is a csv file with sentences in {src} language. "
    "Please translate all of them in {tgt} language"
)


class ExperimentError(Exception):
    pass


class HoldoutTooLarge(ExperimentError):
    pass


class MissingBackTranslation(ExperimentError):
    pass


class NotEnoughSentences(ExperimentError):
    pass


class MalformedCsv(ExperimentError):
    pass


# ---------------------------------------------------------------------------
# Stratified splitting
# ---------------------------------------------------------------------------

def largest_remainder_quotas(counts: dict, total: int) -> dict:
    """Apportion `total` across keys proportionally to `counts`.

    Floors of the exact shares are topped up in order of largest fractional
    remainder; remainder ties break toward the larger count, then the
    smaller key, so the result is deterministic.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    grand = sum(counts.values())
    if grand == 0:
        raise ValueError("counts sum to zero")
    # Integer arithmetic throughout: float shares can misorder exact
    # remainder ties (all remainders share the denominator `grand`).
    quotas = {key: total * count // grand for key, count in counts.items()}
    remainders = {key: total * counts[key] - quotas[key] * grand for key in counts}
    leftover = total - sum(quotas.values())
    order = sorted(
        counts,
        key=lambda key: (-remainders[key], -counts[key], key),
    )
    for key in order[:leftover]:
        quotas[key] += 1
    return quotas


@dataclass
class SplitAssignment:
    assignment: dict  # unit id -> "train" | "holdout"
    seed: int
    holdout_size: int

    @property
    def holdout_ids(self) -> set:
        return {uid for uid, part in self.assignment.items() if part == "holdout"}

    @property
    def train_ids(self) -> set:
        return {uid for uid, part in self.assignment.items() if part == "train"}


def stratified_split(corpus: Corpus, holdout_size: int, seed: int = DEFAULT_SEED) -> SplitAssignment:
    """Seeded stratified holdout: per-source quotas come from largest-remainder
    apportionment of `holdout_size`, then units are sampled uniformly without
    replacement within each source.  Deterministic for a fixed seed."""
    if holdout_size > len(corpus.units):
        raise HoldoutTooLarge(f"holdout {holdout_size} > corpus size {len(corpus.units)}")
    counts = {}
    by_source = {}
    for unit in corpus.units:
        counts[unit.source] = counts.get(unit.source, 0) + 1
        by_source.setdefault(unit.source, []).append(unit.id)
    quotas = largest_remainder_quotas(counts, holdout_size)
    assignment = {}
    for source in sorted(by_source):
        ids = by_source[source]
        rng = random.Random(f"{seed}:{source}")
        chosen = set(rng.sample(ids, quotas[source]))
        for uid in ids:
            assignment[uid] = "holdout" if uid in chosen else "train"
    return SplitAssignment(assignment=assignment, seed=seed, holdout_size=holdout_size)


def save_split(split: SplitAssignment, path) -> None:
    lines = [f"{uid}\t{part}" for uid, part in sorted(split.assignment.items())]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_split(path, seed: int = DEFAULT_SEED) -> SplitAssignment:
    assignment = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        uid, _, part = line.rpartition("\t")
        if part not in ("train", "holdout"):
            raise ValueError(f"bad split line {line!r}")
        assignment[uid] = part
    holdout = sum(1 for part in assignment.values() if part == "holdout")
    return SplitAssignment(assignment=assignment, seed=seed, holdout_size=holdout)


# ---------------------------------------------------------------------------
# Experiment specs and training-set assembly
# ---------------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    exp_id: int
    directions: list  # ordered (src, tgt) tuples
    sources: dict  # (src, tgt) -> frozenset of sources
    use_back_translation: bool = False
    bt_source: str = "qusar"
    bt_lang: str | None = None  # the language whose side is synthetic


def standard_experiment(
    exp_id: int,
    low_lang: str,
    partner_lang: str,
    third_lang: str,
    religious_sources=RELIGIOUS_SOURCES,
    all_sources=ALL_SOURCES,
    bt_source: str = "qusar",
) -> ExperimentSpec:
    """Build the spec for one of the four standard configurations."""
    for tag in (low_lang, partner_lang, third_lang):
        validate_lang_tag(tag)
    if exp_id not in (1, 2, 3, 4):
        raise ValueError(f"unknown experiment id {exp_id}")
    all_set = frozenset(all_sources)
    religious = frozenset(religious_sources)
    directions = [(low_lang, partner_lang), (partner_lang, low_lang)]
    sources = {d: all_set for d in directions}
    if exp_id >= 2:
        extra = [(low_lang, third_lang), (third_lang, low_lang)]
        directions += extra
        for d in extra:
            sources[d] = all_set if exp_id == 4 else religious
    if exp_id >= 3:
        extra = [(third_lang, partner_lang), (partner_lang, third_lang)]
        directions += extra
        for d in extra:
            sources[d] = all_set if exp_id == 4 else religious
    return ExperimentSpec(
        exp_id=exp_id,
        directions=directions,
        sources=sources,
        use_back_translation=(exp_id == 4),
        bt_source=bt_source,
        bt_lang=third_lang,
    )


@dataclass(frozen=True)
class TrainRecord:
    src_lang: str
    tgt_lang: str
    src_text: str
    tgt_text: str
    unit_id: str


def assemble_experiment(
    corpus: Corpus,
    split: SplitAssignment,
    spec: ExperimentSpec,
    bt_units=None,
) -> list:
    """Emit directed training records for train-assigned units.

    Only members with original or back-translated origin are used (members
    tagged mt_for_eval exist solely to score against).  When the spec uses
    back translation, `bt_units` supplies the synthetic side for the back
    translation source, keyed by unit id.
    """
    if spec.use_back_translation and bt_units is None:
        raise MissingBackTranslation(
            f"experiment {spec.exp_id} needs back-translated {spec.bt_source} units"
        )
    bt_by_id = {}
    if bt_units:
        for unit in bt_units:
            bt_by_id[unit.id] = unit
    records = []
    for unit in corpus.units:
        if split.assignment.get(unit.id) != "train":
            continue
        texts = {
            lang: sent.text
            for lang, sent in unit.members.items()
            if unit.origin[lang] in (ORIGIN_ORIGINAL, ORIGIN_BACK_TRANSLATED)
        }
        if spec.use_back_translation and unit.source == spec.bt_source and unit.id in bt_by_id:
            bt = bt_by_id[unit.id]
            for lang, sent in bt.members.items():
                if lang not in texts and bt.origin[lang] == ORIGIN_BACK_TRANSLATED:
                    texts[lang] = sent.text
        for direction in spec.directions:
            src_lang, tgt_lang = direction
            if unit.source not in spec.sources[direction]:
                continue
            if src_lang not in texts or tgt_lang not in texts:
                continue
            records.append(TrainRecord(
                src_lang=src_lang, tgt_lang=tgt_lang,
                src_text=texts[src_lang], tgt_text=texts[tgt_lang],
                unit_id=unit.id,
            ))
    return records


def save_training_set(records, path) -> None:
    """TSV: src_lang, tgt_lang, src_text, tgt_text."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for rec in records:
            fh.write(f"{rec.src_lang}\t{rec.tgt_lang}\t{rec.src_text}\t{rec.tgt_text}\n")


# ---------------------------------------------------------------------------
# LLM evaluation batches
# ---------------------------------------------------------------------------

def language_name(tag: str) -> str:
    return LANGUAGE_NAMES.get(tag.split("_")[0], tag)


def export_llm_batch(
    corpus: Corpus,
    split: SplitAssignment,
    source: str,
    n: int,
    src_lang: str,
    tgt_lang: str,
    out_csv,
) -> str:
    """Write the first `n` holdout units of `source` (stable id order) to an
    RFC 4180 CSV with header `id,text`; returns the translation prompt."""
    holdout = [
        unit for unit in corpus.units
        if unit.source == source and split.assignment.get(unit.id) == "holdout"
        and src_lang in unit.members
    ]
    holdout.sort(key=lambda u: u.id)
    if len(holdout) < n:
        raise NotEnoughSentences(
            f"only {len(holdout)} holdout units of source {source!r} with {src_lang}, need {n}"
        )
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text"])
        for unit in holdout[:n]:
            writer.writerow([unit.id, unit.members[src_lang].text])
    return PROMPT_TEMPLATE.format(src=language_name(src_lang), tgt=language_name(tgt_lang))


_SCRIPT_PREFIXES = {
    "Cyrl": "CYRILLIC",
    "Latn": "LATIN",
    "Arab": "ARABIC",
    "Grek": "GREEK",
    "Geor": "GEORGIAN",
    "Armn": "ARMENIAN",
}


def _has_script(text: str, script: str) -> bool:
    prefix = _SCRIPT_PREFIXES.get(script)
    if prefix is None:
        return any(ch.isalpha() for ch in text)
    for ch in text:
        if ch.isalpha() and unicodedata.name(ch, "").startswith(prefix):
            return True
    return False


@dataclass
class IngestResult:
    translations: dict = field(default_factory=dict)  # id -> text
    refusals: list = field(default_factory=list)


def ingest_llm_responses(
    csv_path,
    expected_ids,
    target_lang: str | None = None,
    refusal_patterns=(),
) -> IngestResult:
    """Parse an `id,text` response CSV and classify rows.

    A row is a refusal when its text is empty, contains no character of the
    target language's script, or matches one of the extra regex patterns.
    Expected ids missing from the file count as refusals too.
    """
    expected = list(expected_ids)
    expected_set = set(expected)
    compiled = [re.compile(p) for p in refusal_patterns]
    script = target_lang.split("_")[1] if target_lang else None
    rows = {}
    try:
        with open(csv_path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["id", "text"]:
                raise MalformedCsv(f"{csv_path}: expected 'id,text' header, got {header}")
            for row in reader:
                if not row:
                    continue
                if len(row) < 2:
                    raise MalformedCsv(f"{csv_path}: row {row!r} has no text column")
                rows[row[0]] = row[1]
    except csv.Error as exc:
        raise MalformedCsv(f"{csv_path}: {exc}") from exc
    result = IngestResult()
    for uid in expected:
        text = rows.get(uid)
        refused = (
            text is None
            or not text.strip()
            or (script is not None and not _has_script(text, script))
            or any(p.search(text) for p in compiled)
        )
        if refused:
            result.refusals.append(uid)
        else:
            result.translations[uid] = text
    unexpected = set(rows) - expected_set
    if unexpected:
        import logging

        logging.getLogger(__name__).warning(
            "ignoring %d unexpected response ids", len(unexpected)
        )
    return result
