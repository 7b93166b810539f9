"""Sentence encoders behind user-supplied model identifiers.

Two families are resolvable:

* ``debug-hash:<dim>`` — a dependency-free deterministic encoder that maps
  each sentence to a pseudo-random unit vector derived from the SHA-256 of
  its NFC-normalized UTF-8 bytes.  Identical sentences always map to
  identical rows on every platform, which is exactly what the format and
  pipeline tests need; the vectors carry no semantics.
* anything else is treated as a ``sentence-transformers`` checkpoint name
  and loaded lazily, so heavyweight ML dependencies stay optional.
"""

from __future__ import annotations

import hashlib
import unicodedata

import numpy as np

from tricorpus_bridge.errors import ModelLoadError

DEBUG_HASH_PREFIX = "debug-hash:"


class HashEncoder:
    """Deterministic stand-in encoder: SHA-256 expanded to a unit vector."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ModelLoadError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = dim

    def encode(self, sentences) -> np.ndarray:
        rows = np.empty((len(sentences), self.dim), dtype=np.float64)
        for i, sentence in enumerate(sentences):
            rows[i] = self._vector(sentence)
        return rows

    def _vector(self, sentence: str) -> np.ndarray:
        seed = unicodedata.normalize("NFC", sentence).encode("utf-8")
        values = []
        counter = 0
        while len(values) < self.dim:
            digest = hashlib.sha256(
                seed + b"\x00" + counter.to_bytes(4, "little")
            ).digest()
            values.extend(b - 127.5 for b in digest)
            counter += 1
        vec = np.array(values[: self.dim], dtype=np.float64)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        return vec / norm


class _SentenceTransformerEncoder:
    def __init__(self, model_id: str, device: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(
                f"model {model_id!r} needs the sentence-transformers package; "
                f"install it or use a debug-hash:<dim> model"
            ) from exc
        try:
            self._model = SentenceTransformer(model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load encoder {model_id!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences) -> np.ndarray:
        return np.asarray(
            self._model.encode(list(sentences), convert_to_numpy=True),
            dtype=np.float64,
        )


def resolve_encoder(model_id: str, device: str = "cpu"):
    """Return an object with `.dim` and `.encode(list of str) -> (n, d) array`."""
    if not model_id or not model_id.strip():
        raise ModelLoadError("model identifier must be non-empty")
    if model_id.startswith(DEBUG_HASH_PREFIX):
        raw = model_id[len(DEBUG_HASH_PREFIX):]
        try:
            dim = int(raw)
        except ValueError:
            raise ModelLoadError(
                f"bad debug encoder id {model_id!r}: expected debug-hash:<dim>"
            ) from None
        return HashEncoder(dim)
    return _SentenceTransformerEncoder(model_id, device)
