"""Byte-pair-encoding merge learning, tokenization and vocabulary extension.

Words are whitespace tokens; the end-of-word marker is fused onto each
word's final character, so a learned token like "ab</w>" always closes a
word.  Merge order is the learning order and tie-breaking is
lexicographic, which makes both learning and tokenization deterministic.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_WORD_END = "</w>"


class BpeError(Exception):
    pass


class EmptyCorpus(BpeError):
    pass


class DuplicateSpecial(BpeError):
    pass


@dataclass
class BpeModel:
    merges: list = field(default_factory=list)  # ordered (left, right) pairs
    vocab: dict = field(default_factory=dict)  # token -> id, ids contiguous from 0
    specials: list = field(default_factory=list)  # e.g. language-code tokens
    base_vocab_size: int = 0  # ids below this predate any merge/extension
    word_end_marker: str = DEFAULT_WORD_END

    def __post_init__(self):
        ids = sorted(self.vocab.values())
        if ids != list(range(len(ids))):
            raise ValueError("vocab ids must be contiguous from 0")
        for left, right in self.merges:
            if left + right not in self.vocab:
                raise ValueError(f"merge product {left + right!r} missing from vocab")
        for tok in self.specials:
            if tok not in self.vocab:
                raise ValueError(f"special token {tok!r} missing from vocab")

    def is_known(self, token: str) -> bool:
        return token in self.vocab

    def id_order(self) -> list:
        return [tok for tok, _ in sorted(self.vocab.items(), key=lambda kv: kv[1])]


def _word_symbols(word: str, marker: str) -> list:
    symbols = list(word)
    symbols[-1] += marker
    return symbols


def learn_bpe(mono, num_merges: int, word_end_marker: str = DEFAULT_WORD_END) -> BpeModel:
    """Learn up to `num_merges` merges over a monolingual corpus.

    Each iteration merges the most frequent adjacent symbol pair within
    words; ties break on the lexicographically smallest (left, right).
    Learning stops early once no pair occurs at least twice.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    word_freq = Counter()
    for line in mono:
        word_freq.update(line.split())
    if not word_freq:
        raise EmptyCorpus("no words in corpus")

    words = {w: _word_symbols(w, word_end_marker) for w in word_freq}
    alphabet = sorted({sym for syms in words.values() for sym in syms})
    vocab = {tok: i for i, tok in enumerate(alphabet)}
    merges = []

    for _ in range(num_merges):
        pair_counts = _count_pairs(words, word_freq)
        if not pair_counts:
            break
        best_count = max(pair_counts.values())
        if best_count < 2:
            break
        best = min(p for p, c in pair_counts.items() if c == best_count)
        merges.append(best)
        vocab[best[0] + best[1]] = len(vocab)
        _apply_merge_to_words(words, best)
    return BpeModel(
        merges=merges,
        vocab=vocab,
        specials=[],
        base_vocab_size=len(alphabet),
        word_end_marker=word_end_marker,
    )


def _count_pairs(words: dict, word_freq: Counter) -> Counter:
    counts = Counter()
    for word, symbols in words.items():
        freq = word_freq[word]
        for left, right in zip(symbols, symbols[1:]):
            counts[(left, right)] += freq
    return counts


def _merge_symbols(symbols: list, pair: tuple) -> list:
    left, right = pair
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _apply_merge_to_words(words: dict, pair: tuple) -> None:
    for word, symbols in words.items():
        if pair[0] in symbols:
            merged = _merge_symbols(symbols, pair)
            if len(merged) != len(symbols):
                words[word] = merged


def tokenize(model: BpeModel, text: str) -> list:
    """Greedy application of the model's merges, word by word.

    Unknown characters come out as single-character tokens that are simply
    absent from the vocabulary (`model.is_known` flags them).
    """
    tokens = []
    for word in text.split():
        symbols = _word_symbols(word, model.word_end_marker)
        for pair in model.merges:
            if len(symbols) < 2:
                break
            symbols = _merge_symbols(symbols, pair)
        tokens.extend(symbols)
    return tokens


def detokenize(model: BpeModel, tokens) -> str:
    """Inverse of tokenize for text over the training alphabet."""
    return "".join(tokens).replace(model.word_end_marker, " ").strip()


def extend_vocab(base: BpeModel, new: BpeModel, lang_code: str) -> BpeModel:
    """Extend `base` with the tokens and merges of `new` plus a language code.

    Base token ids are unchanged (so pretrained embedding rows stay valid);
    unseen tokens from `new` are appended in their id order, and the
    language-code token is appended last as a special token.
    """
    if lang_code in base.vocab or lang_code in base.specials:
        raise DuplicateSpecial(f"token {lang_code!r} already present in base model")
    if base.word_end_marker != new.word_end_marker:
        raise ValueError("models use different end-of-word markers")
    vocab = dict(base.vocab)
    for tok in new.id_order():
        if tok not in vocab:
            vocab[tok] = len(vocab)
    vocab[lang_code] = len(vocab)
    base_merge_set = set(base.merges)
    merges = list(base.merges) + [m for m in new.merges if m not in base_merge_set]
    return BpeModel(
        merges=merges,
        vocab=vocab,
        specials=list(base.specials) + [lang_code],
        base_vocab_size=len(base.vocab),
        word_end_marker=base.word_end_marker,
    )


# ---------------------------------------------------------------------------
# Model files (JSON)
# ---------------------------------------------------------------------------

def save_model(model: BpeModel, path) -> None:
    obj = {
        "merges": [list(m) for m in model.merges],
        "vocab": model.id_order(),
        "specials": list(model.specials),
        "base_vocab_size": model.base_vocab_size,
        "word_end_marker": model.word_end_marker,
    }
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def load_model(path) -> BpeModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return BpeModel(
        merges=[tuple(m) for m in obj["merges"]],
        vocab={tok: i for i, tok in enumerate(obj["vocab"])},
        specials=list(obj.get("specials", [])),
        base_vocab_size=int(obj.get("base_vocab_size", 0)),
        word_end_marker=obj.get("word_end_marker", DEFAULT_WORD_END),
    )
