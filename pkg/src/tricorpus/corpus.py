"""Corpus data model and I/O: sentences, parallel units, verse-keyed docs.

JSONL is the canonical on-disk format (one parallel unit or monolingual
sentence per line, UTF-8, LF).  TSV is a lossy interchange format for
parallel text only; see `save_corpus` for its limitations.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

LANG_TAG_RE = re.compile(r"^[a-z]{3}_[A-Z][a-z]{3}$")

# Canonical data sources; arbitrary other source names are accepted.
KNOWN_SOURCES = ("bible", "quran", "qusar", "gazet")

ORIGIN_ORIGINAL = "original"
ORIGIN_BACK_TRANSLATED = "back_translated"
ORIGIN_MT_FOR_EVAL = "mt_for_eval"
ORIGINS = (ORIGIN_ORIGINAL, ORIGIN_BACK_TRANSLATED, ORIGIN_MT_FOR_EVAL)


class CorpusError(Exception):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(CorpusError):
    def __init__(self, dup_id: str):
        super().__init__(f"duplicate id: {dup_id}")
        self.dup_id = dup_id


def validate_lang_tag(code: str) -> str:
    """Check a `xxx_Xxxx` language tag (ISO 639-3 + script) and return it."""
    if not isinstance(code, str) or not LANG_TAG_RE.match(code):
        raise ValueError(f"invalid language tag {code!r} (expected e.g. 'lez_Cyrl')")
    return code


def _check_clean_text(text: str) -> str:
    if not text or not text.strip():
        raise ValueError("sentence text is empty")
    for ch in text:
        if unicodedata.category(ch) in ("Cc", "Cf"):
            raise ValueError(f"sentence text contains non-printable character U+{ord(ch):04X}")
    return text


def _check_source(source: str) -> str:
    if not source or any(c.isspace() for c in source):
        raise ValueError(f"invalid source tag {source!r}")
    return source


@dataclass(frozen=True)
class Sentence:
    """One text unit with language tag, source tag and optional verse reference."""

    id: str
    text: str
    lang: str
    source: str = "other"
    verse_ref: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("sentence id is empty")
        validate_lang_tag(self.lang)
        _check_clean_text(self.text)
        _check_source(self.source)


@dataclass(frozen=True)
class ParallelUnit:
    """Aligned sentences across 2 or 3 languages, with per-language provenance."""

    id: str
    members: dict  # lang tag -> Sentence
    source: str
    origin: dict = field(default_factory=dict)  # lang tag -> origin value

    def __post_init__(self):
        if not self.id:
            raise ValueError("unit id is empty")
        if len(self.members) < 2:
            raise ValueError(f"unit {self.id}: needs at least 2 members")
        _check_source(self.source)
        if not self.origin:
            object.__setattr__(self, "origin", {lang: ORIGIN_ORIGINAL for lang in self.members})
        for lang, sent in self.members.items():
            validate_lang_tag(lang)
            if sent.lang != lang:
                raise ValueError(f"unit {self.id}: member keyed {lang} has lang {sent.lang}")
            if sent.source != self.source:
                raise ValueError(
                    f"unit {self.id}: member {lang} source {sent.source!r} != unit source {self.source!r}"
                )
        if set(self.origin) != set(self.members):
            raise ValueError(f"unit {self.id}: origin languages do not match member languages")
        for lang, orig in self.origin.items():
            if orig not in ORIGINS:
                raise ValueError(f"unit {self.id}: unknown origin {orig!r} for {lang}")

    def langs(self) -> frozenset:
        return frozenset(self.members)


@dataclass
class Corpus:
    """A named collection of parallel units plus monolingual sentences."""

    units: list = field(default_factory=list)
    mono: list = field(default_factory=list)
    name: str = "corpus"

    def __post_init__(self):
        seen_sent = set()
        seen_unit = set()
        for unit in self.units:
            if unit.id in seen_unit:
                raise DuplicateId(unit.id)
            seen_unit.add(unit.id)
            for sent in unit.members.values():
                if sent.id in seen_sent:
                    raise DuplicateId(sent.id)
                seen_sent.add(sent.id)
        for sent in self.mono:
            if sent.id in seen_sent:
                raise DuplicateId(sent.id)
            seen_sent.add(sent.id)

    def units_by_source(self, source: str) -> list:
        return [u for u in self.units if u.source == source]


# ---------------------------------------------------------------------------
# Verse-keyed documents and verse alignment
# ---------------------------------------------------------------------------

_VERSE_KEY_RE = re.compile(r"^(\d+):(\d+)(?:-(\d+))?$")


def parse_verse_key(key: str) -> tuple[int, int, int]:
    """Parse 'c:v' or merged 'c:v1-v2' into (chapter, v1, v2)."""
    m = _VERSE_KEY_RE.match(key)
    if not m:
        raise ValueError(f"invalid verse key {key!r}")
    chapter, v1 = int(m.group(1)), int(m.group(2))
    v2 = int(m.group(3)) if m.group(3) else v1
    if v2 < v1 or (m.group(3) and v2 == v1):
        raise ValueError(f"invalid verse range {key!r}")
    return chapter, v1, v2


def format_verse_key(chapter: int, v1: int, v2: int) -> str:
    return f"{chapter}:{v1}" if v1 == v2 else f"{chapter}:{v1}-{v2}"


@dataclass(frozen=True)
class VerseDoc:
    """Ordered (verse_key, text) entries for one language of one book."""

    lang: str
    entries: tuple  # of (verse_key, text)

    def __post_init__(self):
        validate_lang_tag(self.lang)
        object.__setattr__(self, "entries", tuple(tuple(e) for e in self.entries))
        prev = None
        for key, text in self.entries:
            chapter, v1, _v2 = parse_verse_key(key)
            if not text or not text.strip():
                raise ValueError(f"empty text for verse {key}")
            if prev is not None and (chapter, v1) <= prev:
                raise ValueError(f"verse keys not strictly increasing at {key}")
            prev = (chapter, v1)

    def chapters(self) -> set:
        return {parse_verse_key(k)[0] for k, _ in self.entries}


def load_verse_doc(path, lang: str) -> VerseDoc:
    """Read `verse_key<TAB>text` lines into a VerseDoc."""
    entries = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        key, sep, text = line.partition("\t")
        if not sep:
            raise MalformedRecord(line_no, f"expected 'verse_key<TAB>text', got {line!r}")
        entries.append((key.strip(), text))
    return VerseDoc(lang=lang, entries=tuple(entries))


def save_verse_doc(doc: VerseDoc, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, text in doc.entries:
            fh.write(f"{key}\t{text}\n")


@dataclass
class VerseAlignment:
    """Result of align_verses: units plus an audit trail of what did not match."""

    units: list = field(default_factory=list)
    unmatched_a: list = field(default_factory=list)  # verse keys only present on side a
    unmatched_b: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (a_keys, b_keys) with no consistent union


def _verse_set(lo: int, hi: int) -> set:
    return set(range(lo, hi + 1))


def align_verses(
    a: VerseDoc,
    b: VerseDoc,
    source: str = "bible",
    book: str | None = None,
    unit_prefix: str = "",
) -> VerseAlignment:
    """Pair verses of two translations of the same book, merging split verses.

    When one side stores a merged key (e.g. "1:1-2") that the other side
    lists as separate verses, the separate texts are concatenated with a
    single space so that every emitted unit covers the same verse numbers
    on both sides.  Verses present on only one side are reported, never
    silently dropped; key groups with no consistent union are skipped and
    logged.
    """
    if a.chapters() != b.chapters():
        raise ValueError(
            f"documents cover different chapters: {sorted(a.chapters())} vs {sorted(b.chapters())}"
        )
    result = VerseAlignment()
    by_chapter_a = _group_by_chapter(a)
    by_chapter_b = _group_by_chapter(b)
    for chapter in sorted(by_chapter_a):
        _align_chapter(by_chapter_a[chapter], by_chapter_b[chapter], a, b, source, book,
                       unit_prefix, result)
    for unit in result.units:
        ref = unit.members[a.lang].verse_ref
        assert ref == unit.members[b.lang].verse_ref, "verse union mismatch"
    return result


def _group_by_chapter(doc: VerseDoc) -> dict:
    out = {}
    for key, text in doc.entries:
        chapter, v1, v2 = parse_verse_key(key)
        out.setdefault(chapter, []).append((v1, v2, key, text))
    return out


def _align_chapter(a_keys, b_keys, doc_a, doc_b, source, book, unit_prefix, result):
    ia = ib = 0
    while ia < len(a_keys) or ib < len(b_keys):
        # Leading verses with no counterpart on the other side.
        if ib == len(b_keys) or (ia < len(a_keys) and a_keys[ia][1] < b_keys[ib][0]):
            result.unmatched_a.append(a_keys[ia][2])
            ia += 1
            continue
        if ia == len(a_keys) or b_keys[ib][1] < a_keys[ia][0]:
            result.unmatched_b.append(b_keys[ib][2])
            ib += 1
            continue
        if a_keys[ia][0] != b_keys[ib][0]:
            # Intersecting keys that start at different verses: a merged key
            # partially overlaps the other side with no consistent union.
            log.warning("overlapping verse ranges, skipped: %s vs %s", a_keys[ia][2], b_keys[ib][2])
            result.skipped.append(((a_keys[ia][2],), (b_keys[ib][2],)))
            ia += 1
            ib += 1
            continue
        ga = [a_keys[ia]]
        gb = [b_keys[ib]]
        ia += 1
        ib += 1
        sa = _verse_set(ga[0][0], ga[0][1])
        sb = _verse_set(gb[0][0], gb[0][1])
        consistent = True
        while sa != sb:
            if max(sa) < max(sb):
                if ia < len(a_keys) and a_keys[ia][0] == max(sa) + 1:
                    ga.append(a_keys[ia])
                    sa |= _verse_set(a_keys[ia][0], a_keys[ia][1])
                    ia += 1
                else:
                    consistent = False
                    break
            elif max(sb) < max(sa):
                if ib < len(b_keys) and b_keys[ib][0] == max(sb) + 1:
                    gb.append(b_keys[ib])
                    sb |= _verse_set(b_keys[ib][0], b_keys[ib][1])
                    ib += 1
                else:
                    consistent = False
                    break
            else:
                consistent = False  # equal maxima but different sets: internal gap
                break
        a_group_keys = tuple(k for _, _, k, _ in ga)
        b_group_keys = tuple(k for _, _, k, _ in gb)
        if not consistent:
            log.warning("overlapping verse ranges, skipped: %s vs %s", a_group_keys, b_group_keys)
            result.skipped.append((a_group_keys, b_group_keys))
            continue
        chapter = parse_verse_key(ga[0][2])[0]
        key = format_verse_key(chapter, min(sa), max(sa))
        ref = f"{book}:{key}" if book else key
        unit_id = f"{unit_prefix}{ref}"
        members = {}
        for doc, group in ((doc_a, ga), (doc_b, gb)):
            text = " ".join(t for _, _, _, t in group)
            members[doc.lang] = Sentence(
                id=f"{unit_id}.{doc.lang}", text=text, lang=doc.lang, source=source, verse_ref=ref
            )
        result.units.append(ParallelUnit(id=unit_id, members=members, source=source))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _sentence_to_obj(sent: Sentence, with_lang: bool = True) -> dict:
    obj = {"id": sent.id, "text": sent.text}
    if with_lang:
        obj["lang"] = sent.lang
    if sent.verse_ref is not None:
        obj["verse_ref"] = sent.verse_ref
    return obj


def _unit_to_line(unit: ParallelUnit) -> str:
    obj = {
        "type": "unit",
        "id": unit.id,
        "source": unit.source,
        "members": {lang: _sentence_to_obj(s, with_lang=False) for lang, s in sorted(unit.members.items())},
        "origin": dict(sorted(unit.origin.items())),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _mono_to_line(sent: Sentence) -> str:
    obj = {"type": "sentence", "source": sent.source}
    obj.update(_sentence_to_obj(sent))
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def save_corpus(corpus: Corpus, path, format: str = "jsonl") -> None:
    """Write a corpus to disk. `format` is 'jsonl' (canonical) or 'tsv'.

    TSV carries only unit id, source and per-language texts; member
    sentence ids are derived as `<unit_id>.<lang>` on load, and origin and
    verse references are not stored.  Monolingual sentences cannot be
    written to TSV.
    """
    path = Path(path)
    if format == "jsonl":
        lines = [_unit_to_line(u) for u in corpus.units]
        lines += [_mono_to_line(s) for s in corpus.mono]
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    elif format == "tsv":
        if corpus.mono:
            raise ValueError("TSV is a parallel-only format; corpus has monolingual sentences")
        langs = sorted({lang for u in corpus.units for lang in u.members})
        rows = ["\t".join(["id", "source"] + langs)]
        for unit in corpus.units:
            cells = [unit.id, unit.source]
            for lang in langs:
                text = unit.members[lang].text if lang in unit.members else ""
                if "\t" in text:
                    raise ValueError(f"unit {unit.id}: text contains a tab, not representable in TSV")
                cells.append(text)
            if "\t" in unit.id or "\t" in unit.source:
                raise ValueError(f"unit {unit.id}: tab in id or source")
            rows.append("\t".join(cells))
        path.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    else:
        raise ValueError(f"unknown corpus format {format!r}")


def _unit_from_obj(obj: dict, line_no: int) -> ParallelUnit:
    try:
        members = {}
        for lang, m in obj["members"].items():
            members[lang] = Sentence(
                id=m["id"], text=m["text"], lang=lang,
                source=obj["source"], verse_ref=m.get("verse_ref"),
            )
        return ParallelUnit(
            id=obj["id"], members=members, source=obj["source"],
            origin=dict(obj.get("origin") or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, str(exc)) from exc


def load_corpus(path, format: str = "jsonl", name: str | None = None) -> Corpus:
    """Read a corpus from JSONL or TSV. Raises MalformedRecord / DuplicateId."""
    path = Path(path)
    name = name if name is not None else path.stem
    if format == "jsonl":
        units, mono = [], []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(line_no, f"bad JSON: {exc}") from exc
                kind = obj.get("type")
                if kind == "unit":
                    units.append(_unit_from_obj(obj, line_no))
                elif kind == "sentence":
                    try:
                        mono.append(Sentence(
                            id=obj["id"], text=obj["text"], lang=obj["lang"],
                            source=obj.get("source", "other"), verse_ref=obj.get("verse_ref"),
                        ))
                    except (KeyError, TypeError, ValueError) as exc:
                        raise MalformedRecord(line_no, str(exc)) from exc
                else:
                    raise MalformedRecord(line_no, f"unknown record type {kind!r}")
        return Corpus(units=units, mono=mono, name=name)
    if format == "tsv":
        with open(path, encoding="utf-8") as fh:
            raw_lines = fh.read().split("\n")
        if raw_lines and raw_lines[-1] == "":
            raw_lines.pop()
        if not raw_lines:
            raise MalformedRecord(1, "missing TSV header")
        header = raw_lines[0].split("\t")
        if header[:2] != ["id", "source"] or len(header) < 3:
            raise MalformedRecord(1, f"bad TSV header {raw_lines[0]!r}")
        langs = [validate_lang_tag(code) for code in header[2:]]
        units = []
        for line_no, line in enumerate(raw_lines[1:], start=2):
            cells = line.split("\t")
            if len(cells) != len(header):
                raise MalformedRecord(line_no, f"expected {len(header)} columns, got {len(cells)}")
            unit_id, unit_source = cells[0], cells[1]
            members = {}
            try:
                for lang, text in zip(langs, cells[2:]):
                    if not text:
                        continue
                    members[lang] = Sentence(
                        id=f"{unit_id}.{lang}", text=text, lang=lang, source=unit_source
                    )
                units.append(ParallelUnit(id=unit_id, members=members, source=unit_source))
            except ValueError as exc:
                raise MalformedRecord(line_no, str(exc)) from exc
        return Corpus(units=units, mono=[], name=name)
    raise ValueError(f"unknown corpus format {format!r}")


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass
class CorpusStats:
    by_source: dict  # source -> unit count
    by_source_langset: dict  # (source, frozenset of langs) -> unit count
    total_units: int
    mono_count: int

    def render(self) -> str:
        lines = [f"{'source':<12}{'languages':<36}{'units':>8}"]
        for (source, langset), count in sorted(
            self.by_source_langset.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))
        ):
            lines.append(f"{source:<12}{'+'.join(sorted(langset)):<36}{count:>8}")
        lines.append(f"{'total':<48}{self.total_units:>8}")
        lines.append(f"{'mono':<48}{self.mono_count:>8}")
        return "\n".join(lines)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Exact per-source unit counts, plus the monolingual count."""
    by_source = {}
    by_source_langset = {}
    for unit in corpus.units:
        by_source[unit.source] = by_source.get(unit.source, 0) + 1
        key = (unit.source, unit.langs())
        by_source_langset[key] = by_source_langset.get(key, 0) + 1
    return CorpusStats(
        by_source=by_source,
        by_source_langset=by_source_langset,
        total_units=len(corpus.units),
        mono_count=len(corpus.mono),
    )
