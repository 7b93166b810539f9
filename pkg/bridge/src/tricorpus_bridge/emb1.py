"""Writer and reader for the EMB1 embedding file contract.

Layout: 4-byte magic ``EMB1``, u32 little-endian row count, u32
little-endian dimension, then ``n * d`` little-endian float32 values in
row-major order.  Row ids live in a UTF-8 sidecar at ``<path>.ids`` with
one id per line, in row order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

EMB1_MAGIC = b"EMB1"


def write_emb1(ids, vectors, path) -> None:
    path = Path(path)
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    n, d = vectors.shape
    if d < 1:
        raise ValueError("embedding dimension must be >= 1")
    ids = [str(i) for i in ids]
    if len(ids) != n:
        raise ValueError(f"{len(ids)} ids for {n} rows")
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(vectors.tobytes())
    Path(str(path) + ".ids").write_text(
        "".join(i + "\n" for i in ids), encoding="utf-8"
    )


def read_emb1(path):
    """Read back (ids, vectors); used for the bridge's own round-trip checks."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != EMB1_MAGIC or len(data) < 12:
        raise ValueError(f"{path}: not an EMB1 file")
    n, d = struct.unpack("<II", data[4:12])
    if len(data) != 12 + n * d * 4:
        raise ValueError(f"{path}: truncated payload")
    vectors = np.frombuffer(data[12:], dtype="<f4").reshape(n, d).copy()
    ids = Path(str(path) + ".ids").read_text(encoding="utf-8").splitlines()
    if len(ids) != n:
        raise ValueError(f"{path}.ids: {len(ids)} ids for {n} rows")
    return ids, vectors
