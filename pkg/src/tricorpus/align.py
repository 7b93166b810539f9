"""Embedding-based monotonic sentence alignment of comparable document pairs.

A dynamic program over bead types 1-1, 2-1, 1-2, 1-0 and 0-1 finds the
minimum-cost monotonic path; matched beads cost one minus the cosine of
the mean-pooled, renormalized span embeddings, skips cost a flat penalty.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EMB1_MAGIC = b"EMB1"

DEFAULT_SKIP_PENALTY = 0.25
DEFAULT_NEIGHBORS = 4
DEFAULT_CONFIDENCE_THRESHOLD = 0.5

# Transition preference on cost ties: 1-1, then 2-1, then 1-2, then skips.
_BEAD_STEPS = ((1, 1), (2, 1), (1, 2), (1, 0), (0, 1))


class AlignError(Exception):
    pass


class BadMagic(AlignError):
    pass


class TruncatedFile(AlignError):
    pass


class IdCountMismatch(AlignError):
    pass


class DimensionMismatch(AlignError):
    pass


@dataclass
class EmbeddingMatrix:
    ids: list
    vectors: np.ndarray  # n x d float32
    normalized: bool = False

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if self.vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if len(self.ids) != self.vectors.shape[0]:
            raise IdCountMismatch(
                f"{len(self.ids)} ids for {self.vectors.shape[0]} rows"
            )
        if self.normalized and self.vectors.shape[0]:
            norms = np.linalg.norm(self.vectors, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-4):
                raise ValueError("normalized=True but some rows are not unit length")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def save_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Write the EMB1 binary format plus the `.ids` sidecar."""
    path = Path(path)
    n, d = matrix.vectors.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(np.ascontiguousarray(matrix.vectors, dtype="<f4").tobytes())
    Path(str(path) + ".ids").write_text(
        "".join(i + "\n" for i in matrix.ids), encoding="utf-8"
    )


def load_embeddings(path, renormalize: bool = False) -> EmbeddingMatrix:
    """Read an EMB1 file: magic, u32 n, u32 d, then n*d little-endian f32."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != EMB1_MAGIC:
        raise BadMagic(f"{path}: expected EMB1 magic, got {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedFile(f"{path}: missing header")
    n, d = struct.unpack("<II", data[4:12])
    if d < 1:
        raise TruncatedFile(f"{path}: dimension 0 in header")
    expected = 12 + n * d * 4
    if len(data) != expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, found {len(data)}")
    vectors = np.frombuffer(data[12:], dtype="<f4").reshape(n, d).copy()
    ids_path = Path(str(path) + ".ids")
    ids = ids_path.read_text(encoding="utf-8").splitlines() if ids_path.exists() else None
    if ids is None:
        raise IdCountMismatch(f"{ids_path}: sidecar missing")
    if len(ids) != n:
        raise IdCountMismatch(f"{ids_path}: {len(ids)} ids for {n} rows")
    normalized = False
    if renormalize and n:
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        vectors = vectors / norms
        normalized = True
    elif n:
        normalized = bool(np.all(np.abs(np.linalg.norm(vectors, axis=1) - 1.0) <= 1e-4))
    return EmbeddingMatrix(ids=ids, vectors=vectors, normalized=normalized)


# ---------------------------------------------------------------------------
# Margin scoring
# ---------------------------------------------------------------------------

def _cosine(x: np.ndarray, y: np.ndarray) -> float:
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x, y)) / (nx * ny)


def margin_score(x, y, nn_x, nn_y, k: int) -> float:
    """Ratio-margin score: cosine of (x, y) over the mean of both sides'
    average top-k neighbor cosines.  The denominator is floored at 1e-6."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"x has dim {x.shape}, y has dim {y.shape}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(nn_x) < k or len(nn_y) < k:
        raise ValueError("neighbor lists must have at least k entries")
    for z in list(nn_x) + list(nn_y):
        if np.asarray(z).shape != x.shape:
            raise DimensionMismatch("neighbor vector dimension differs from x/y")
    sims_x = sorted((_cosine(x, np.asarray(z, dtype=np.float64)) for z in nn_x), reverse=True)
    sims_y = sorted((_cosine(y, np.asarray(z, dtype=np.float64)) for z in nn_y), reverse=True)
    denom = 0.5 / k * (sum(sims_x[:k]) + sum(sims_y[:k]))
    return _cosine(x, y) / max(denom, 1e-6)


# ---------------------------------------------------------------------------
# Alignment dynamic program
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bead:
    src_span: tuple  # [i0, i1)
    tgt_span: tuple  # [j0, j1)
    cost: float

    @property
    def kind(self) -> str:
        return f"{self.src_span[1] - self.src_span[0]}-{self.tgt_span[1] - self.tgt_span[0]}"

    @property
    def is_skip(self) -> bool:
        return self.src_span[0] == self.src_span[1] or self.tgt_span[0] == self.tgt_span[1]


@dataclass
class AlignmentPath:
    beads: list = field(default_factory=list)
    total_cost: float = 0.0

    def validate(self, n_src: int, n_tgt: int) -> None:
        """Check monotonic, non-overlapping, covering spans on both sides."""
        pos_s = pos_t = 0
        for bead in self.beads:
            (s0, s1), (t0, t1) = bead.src_span, bead.tgt_span
            if s0 != pos_s or t0 != pos_t or s1 < s0 or t1 < t0:
                raise ValueError(f"bead {bead} breaks monotonic coverage")
            if s1 - s0 > 2 or t1 - t0 > 2 or (s1 == s0 and t1 == t0):
                raise ValueError(f"bead {bead} has an invalid span shape")
            pos_s, pos_t = s1, t1
        if pos_s != n_src or pos_t != n_tgt:
            raise ValueError("path does not cover both documents")


def _span_cost(vectors: np.ndarray, other: np.ndarray, i0, i1, j0, j1) -> float:
    u = vectors[i0:i1].mean(axis=0)
    v = other[j0:j1].mean(axis=0)
    return 1.0 - _cosine(u, v)


def align_documents(
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    skip_penalty: float = DEFAULT_SKIP_PENALTY,
) -> AlignmentPath:
    """Minimum-cost monotonic alignment of two embedded documents.

    Ties between equal-cost transitions resolve to 1-1, then 2-1, then
    1-2, then the skips, making the result deterministic.
    """
    if src.n == 0 or tgt.n == 0:
        raise ValueError("both documents must be non-empty")
    if src.dim != tgt.dim:
        raise DimensionMismatch(f"source dim {src.dim} != target dim {tgt.dim}")
    sv = src.vectors.astype(np.float64)
    tv = tgt.vectors.astype(np.float64)
    n, m = src.n, tgt.n

    inf = float("inf")
    dp = [[inf] * (m + 1) for _ in range(n + 1)]
    back = [[None] * (m + 1) for _ in range(n + 1)]
    dp[0][0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best, best_step, best_cost = inf, None, 0.0
            for di, dj in _BEAD_STEPS:
                pi, pj = i - di, j - dj
                if pi < 0 or pj < 0 or dp[pi][pj] == inf:
                    continue
                if di == 0 or dj == 0:
                    cost = skip_penalty
                else:
                    cost = _span_cost(sv, tv, pi, i, pj, j)
                total = dp[pi][pj] + cost
                if total < best:
                    best, best_step, best_cost = total, (di, dj), cost
            dp[i][j] = best
            back[i][j] = (best_step, best_cost)

    beads = []
    i, j = n, m
    while i or j:
        (di, dj), cost = back[i][j]
        beads.append(Bead(src_span=(i - di, i), tgt_span=(j - dj, j), cost=cost))
        i, j = i - di, j - dj
    beads.reverse()
    path = AlignmentPath(beads=beads, total_cost=dp[n][m])
    path.validate(n, m)
    return path


@dataclass
class AlignedPair:
    src_ids: list
    tgt_ids: list
    src_text: str
    tgt_text: str
    similarity: float
    low_confidence: bool


def emit_pairs(
    path: AlignmentPath,
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    src_texts,
    tgt_texts,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    join=" ".join,
) -> list:
    """Turn matched beads into text pairs; spans merge via `join`.

    Pairs whose span similarity falls below `threshold` are emitted but
    flagged low-confidence for manual review.
    """
    pairs = []
    for bead in path.beads:
        if bead.is_skip:
            continue
        (s0, s1), (t0, t1) = bead.src_span, bead.tgt_span
        similarity = 1.0 - bead.cost
        pairs.append(AlignedPair(
            src_ids=list(src.ids[s0:s1]),
            tgt_ids=list(tgt.ids[t0:t1]),
            src_text=join(src_texts[s0:s1]),
            tgt_text=join(tgt_texts[t0:t1]),
            similarity=similarity,
            low_confidence=similarity < threshold,
        ))
    return pairs
