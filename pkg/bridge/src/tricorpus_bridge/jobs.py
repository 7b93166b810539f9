"""The two bridge jobs: embed a sentence file, back-translate a units file.

Both jobs read and write the toolkit's file contracts only; nothing here
imports the toolkit itself.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tricorpus_bridge.emb1 import write_emb1
from tricorpus_bridge.encoders import resolve_encoder
from tricorpus_bridge.errors import BridgeError, EmptyInput, UnsupportedLanguage
from tricorpus_bridge.translators import resolve_translator

ORIGIN_BACK_TRANSLATED = "back_translated"
ORIGIN_ORIGINAL = "original"

_LANG_TAG_RE = re.compile(r"^[a-z]{3}_[A-Z][a-z]{3}$")


@dataclass(frozen=True)
class BridgeJob:
    mode: str  # "embed" | "translate"
    input_path: str
    output_path: str
    model_id: str
    batch_size: int = 32
    device: str = "cpu"
    src_lang: str | None = None  # translate only
    tgt_lang: str | None = None  # translate only
    id_prefix: str = ""  # embed only

    def __post_init__(self):
        if self.mode not in ("embed", "translate"):
            raise BridgeError(f"unknown job mode {self.mode!r}")
        if self.batch_size < 1:
            raise BridgeError(f"batch size must be >= 1, got {self.batch_size}")
        if self.mode == "translate":
            for tag in (self.src_lang, self.tgt_lang):
                if tag is None or not _LANG_TAG_RE.match(tag):
                    raise BridgeError(f"bad language tag {tag!r} (want e.g. azj_Latn)")


def _batches(items, size):
    for start in range(0, len(items), size):
        yield items[start:start + size]


def embed(input_path, model_id: str, output_path, *,
          batch_size: int = 32, device: str = "cpu", id_prefix: str = "") -> int:
    """Encode one sentence per input line into an L2-normalized EMB1 file.

    Row ids are `<prefix><line number>` (1-based).  Returns the row count.
    """
    encoder = resolve_encoder(model_id, device)
    lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            raise EmptyInput(f"{input_path}: line {i} is empty")

    chunks = [encoder.encode(batch) for batch in _batches(lines, batch_size)]
    if chunks:
        rows = np.vstack([np.asarray(c, dtype=np.float64) for c in chunks])
    else:
        rows = np.zeros((0, encoder.dim), dtype=np.float64)
    if rows.shape[0]:
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        rows = rows / norms

    ids = [f"{id_prefix}{i}" for i in range(1, len(lines) + 1)]
    write_emb1(ids, rows, output_path)
    return len(lines)


def back_translate(input_path, model_id: str, src_lang: str, tgt_lang: str,
                   output_path, *, batch_size: int = 32, device: str = "cpu") -> int:
    """Add a `tgt_lang` member tagged back_translated to every unit.

    Input and output are corpus JSONL.  Unit ids, line order, and any
    standalone sentence lines pass through untouched.  Returns the number
    of units translated.
    """
    translator = resolve_translator(model_id, device)
    if not translator.supports(src_lang, tgt_lang):
        raise UnsupportedLanguage(
            f"model {model_id!r} does not translate {src_lang} -> {tgt_lang}"
        )

    lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    records = []  # (raw_line, parsed unit obj or None)
    texts = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            raise BridgeError(f"{input_path}: line {i} is empty")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"{input_path}: line {i}: {exc}") from exc
        kind = obj.get("type")
        if kind == "sentence":
            records.append((line, None))
            continue
        if kind != "unit":
            raise BridgeError(f"{input_path}: line {i}: unknown record type {kind!r}")
        uid = obj.get("id")
        members = obj.get("members") or {}
        if src_lang not in members:
            raise BridgeError(f"unit {uid!r} has no {src_lang} member")
        if tgt_lang in members:
            raise BridgeError(f"unit {uid!r} already has a {tgt_lang} member")
        records.append((line, obj))
        texts.append(members[src_lang]["text"])

    translated = []
    for batch in _batches(texts, batch_size):
        translated.extend(translator.translate(batch, src_lang, tgt_lang))

    out_lines = []
    cursor = 0
    for raw, obj in records:
        if obj is None:
            out_lines.append(raw)
            continue
        obj["members"][tgt_lang] = {
            "id": f"{obj['id']}.{tgt_lang}",
            "text": translated[cursor],
        }
        origin = dict(obj.get("origin") or {lang: ORIGIN_ORIGINAL for lang in obj["members"]})
        origin[tgt_lang] = ORIGIN_BACK_TRANSLATED
        obj["origin"] = origin
        out_lines.append(json.dumps(obj, separators=(",", ":"), sort_keys=True,
                                    ensure_ascii=False))
        cursor += 1

    Path(output_path).write_text("".join(l + "\n" for l in out_lines), encoding="utf-8")
    return cursor


def run_job(job: BridgeJob) -> int:
    if job.mode == "embed":
        return embed(
            job.input_path, job.model_id, job.output_path,
            batch_size=job.batch_size, device=job.device, id_prefix=job.id_prefix,
        )
    return back_translate(
        job.input_path, job.model_id, job.src_lang, job.tgt_lang, job.output_path,
        batch_size=job.batch_size, device=job.device,
    )
