"""Cleaning and sentence segmentation for extracted newspaper/encyclopedia text.

The pipeline is: repair mojibake -> normalize (strip non-printables,
collapse whitespace, fix palochka) -> split into sentences -> length
filter.  All operations are pure functions.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

# Byte reinterpretations tried by fix_encoding: UTF-8 text that was decoded
# with one of these legacy codecs and re-saved shows up as mojibake.
_LEGACY_CODECS = ("latin-1", "cp1251")

# Accepting a repair requires this much gain in Cyrillic ratio; conservative
# so that mixed-script lines are never "repaired".
_CYRILLIC_GAIN_THRESHOLD = 0.2

PALOCHKA = "Ӏ"  # Ӏ, Cyrillic letter palochka
# Characters that PDF extraction commonly substitutes for palochka.
_PALOCHKA_STANDINS = {"I", "l", "1", "ӏ"}

_CYRILLIC_VOWELS = set("аеёиоуыэюяАЕЁИОУЫЭЮЯ")


def _is_cyrillic(ch: str) -> bool:
    return "Ѐ" <= ch <= "ԯ" or "ᲀ" <= ch <= "᲏" or "ⷠ" <= ch <= "ⷿ"


def _cyrillic_count(text: str) -> int:
    return sum(1 for ch in text if _is_cyrillic(ch))


@dataclass
class CleanReport:
    input_chars: int = 0
    removed_nonprintable: int = 0
    encoding_fixes: int = 0
    palochka_normalizations: int = 0

    def merge(self, other: "CleanReport") -> "CleanReport":
        return CleanReport(
            self.input_chars + other.input_chars,
            self.removed_nonprintable + other.removed_nonprintable,
            self.encoding_fixes + other.encoding_fixes,
            self.palochka_normalizations + other.palochka_normalizations,
        )


def fix_encoding(text: str) -> tuple[str, int]:
    """Undo mojibake from UTF-8 bytes mis-decoded with a legacy codec.

    A repair is accepted only when it raises the Cyrillic letter ratio by
    more than 0.2 and never loses Cyrillic letters.  Applied repeatedly so
    doubly mangled text also recovers; non-repairable text passes through.
    """
    fixes = 0
    current = text
    for _ in range(3):
        repaired = _try_repair(current)
        if repaired is None:
            break
        current = repaired
        fixes += 1
    return current, fixes


def _try_repair(text: str) -> str | None:
    if not text:
        return None
    orig_count = _cyrillic_count(text)
    orig_ratio = orig_count / len(text)
    best = None
    best_ratio = orig_ratio + _CYRILLIC_GAIN_THRESHOLD
    for codec in _LEGACY_CODECS:
        try:
            candidate = text.encode(codec).decode("utf-8")
        except (UnicodeEncodeError, UnicodeDecodeError):
            continue
        if not candidate:
            continue
        cand_count = _cyrillic_count(candidate)
        if cand_count < orig_count:
            continue
        ratio = cand_count / len(candidate)
        if ratio > best_ratio:
            best = candidate
            best_ratio = ratio
    return best


_WS_RUN_RE = re.compile(r"[ \t]+")


def normalize(text: str) -> tuple[str, CleanReport]:
    """Strip non-printables, collapse spaces, restore palochka, apply NFC.

    Removes Unicode Cc/Cf characters except LF and TAB (soft hyphens and
    zero-width characters fall in Cf), collapses runs of spaces/tabs to a
    single space, and rewrites Latin I/l, digit 1 and lowercase palochka to
    Ӏ (U+04C0) where the context is a Lezgian word.  Idempotent.
    """
    report = CleanReport(input_chars=len(text))
    kept = []
    for ch in text:
        if ch in ("\n", "\t"):
            kept.append(ch)
        elif unicodedata.category(ch) in ("Cc", "Cf"):
            report.removed_nonprintable += 1
        else:
            kept.append(ch)
    # NFC after stripping: removing a format character can expose a new
    # composition, and composing first would hide it from the second pass.
    text = unicodedata.normalize("NFC", _WS_RUN_RE.sub(" ", "".join(kept)))

    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch in _PALOCHKA_STANDINS:
            prev_cyr = bool(out) and _is_cyrillic(out[-1])
            nxt = text[i + 1] if i + 1 < n else ""
            before_vowel = nxt in _CYRILLIC_VOWELS
            at_boundary = nxt == "" or not (nxt.isalpha() or nxt.isdigit())
            if prev_cyr and (before_vowel or at_boundary):
                out.append(PALOCHKA)
                report.palochka_normalizations += 1
                continue
        out.append(ch)
    return "".join(out), report


def clean_text(text: str) -> tuple[str, CleanReport]:
    """fix_encoding followed by normalize, with a combined report."""
    repaired, fixes = fix_encoding(text)
    cleaned, report = normalize(repaired)
    report.input_chars = len(text)
    report.encoding_fixes = fixes
    return cleaned, report


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Russian capital letters А..Я plus Ё, used for default initials like "А.".
_RU_CAPS = [chr(c) for c in range(0x0410, 0x0430)] + ["Ё"]

DEFAULT_ABBREVIATIONS = {
    "rus_Cyrl": ["г.", "т.е."] + [f"{c}." for c in _RU_CAPS],
    "azj_Latn": ["s.", "b."],
}

_TERMINALS = ".!?…"
_OPENING_QUOTES = "\"'«„“‘"


def load_abbreviations(abbrev_dir, lang: str) -> list[str]:
    """Read one-entry-per-line abbreviation list for `lang` from a directory.

    Falls back to the shipped defaults when the directory has no file for
    the language.
    """
    if abbrev_dir is not None:
        path = Path(abbrev_dir) / f"{lang}.txt"
        if path.exists():
            entries = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
            return [e for e in entries if e]
    return list(DEFAULT_ABBREVIATIONS.get(lang, []))


def _starts_sentence(ch: str) -> bool:
    return ch.isupper() or ch.isdigit() or ch in _OPENING_QUOTES


def split_sentences(text: str, lang: str = "rus_Cyrl", abbreviations=None) -> list[str]:
    """Rule-based sentence splitter for normalized text.

    Splits after sentence-final punctuation (. ! ? …) followed by
    whitespace and an uppercase letter, digit or opening quote, unless the
    word ending at the punctuation is a known abbreviation.  Joining the
    outputs reproduces the input's non-whitespace characters in order.
    """
    if abbreviations is None:
        abbreviations = DEFAULT_ABBREVIATIONS.get(lang, [])
    abbrev_set = set(abbreviations)
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINALS:
                j += 1
            k = j + 1
            while k < n and text[k].isspace():
                k += 1
            if k > j + 1 and k < n and _starts_sentence(text[k]) and not _is_abbreviation(
                text, j, abbrev_set
            ):
                piece = text[start:j + 1].strip()
                if piece:
                    sentences.append(piece)
                start = k
            i = j + 1
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_abbreviation(text: str, punct_idx: int, abbrev_set: set) -> bool:
    # Word = maximal non-space run ending at (and including) the punctuation.
    if text[punct_idx] != ".":
        return False
    start = punct_idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:punct_idx + 1] in abbrev_set


def filter_short(sentences, min_tokens: int = 3) -> list[str]:
    """Drop sentences with fewer than `min_tokens` whitespace tokens.

    PDF extraction produces header/footer fragments; this is the default
    monolingual-pipeline filter.
    """
    return [s for s in sentences if len(s.split()) >= min_tokens]
