"""Deterministic synthetic fixtures with planted ground truth.

A generated fixture contains a salient rectangular block of patches whose
embeddings lean toward the text vector and whose attention mass dominates
the CLS row, against a background that is orthogonalized to the text vector.
Selection tests can therefore measure recall against exact ground truth.

Everything is a pure function of the seed. The normative construction,
which an independent implementation must follow to the letter to reproduce
files byte for byte, is:

1. One Gaussian stream (``GaussianStream`` over xoshiro256** seeded from
   splitmix64) supplies every draw, in order.
2. Text vector: D draws, then divide by sqrt(dot(v, v)) in float64.
3. For each patch i in row-major grid order, draw D Gaussians g_i, then
   set v_i = s*t + (1-s)*g_i for planted patches or
   v_i = g_i - dot(g_i, t)*t for background, and normalize as above.
4. Attention (no draws): every head identical. The CLS row spreads mass s
   uniformly over planted patch keys and 1-s uniformly over background
   keys, with 0 on CLS itself; every patch-query row is uniform over all
   N+1 keys. Finally every row is divided by its sum.
5. Arrays are computed in float64 and cast to float32 once, at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import FixtureContainer
from .rng import GaussianStream, Xoshiro256StarStar


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape, planted block, signal strength, and seed for one fixture."""

    grid_rows: int
    grid_cols: int
    dim: int
    heads: int
    planted_row: int
    planted_col: int
    planted_height: int
    planted_width: int
    signal_strength: float
    seed: int

    def __post_init__(self):
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid dimensions must be positive")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.heads < 1:
            raise ValueError(f"heads must be >= 1, got {self.heads}")
        if self.planted_height < 1 or self.planted_width < 1:
            raise ValueError("planted block must be at least 1x1")
        if self.planted_row < 0 or self.planted_row + self.planted_height > self.grid_rows:
            raise ValueError("planted block exceeds grid rows")
        if self.planted_col < 0 or self.planted_col + self.planted_width > self.grid_cols:
            raise ValueError("planted block exceeds grid cols")
        if not 0.0 < self.signal_strength <= 1.0:
            raise ValueError(
                f"signal_strength must lie in (0, 1], got {self.signal_strength}"
            )
        if self.seed < 0 or self.seed > 0xFFFFFFFFFFFFFFFF:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def n_patches(self) -> int:
        return self.grid_rows * self.grid_cols

    def planted_indices(self) -> np.ndarray:
        """Row-major patch indices of the planted block, ascending."""
        rows = np.arange(self.planted_row, self.planted_row + self.planted_height)
        cols = np.arange(self.planted_col, self.planted_col + self.planted_width)
        idx = (rows[:, None] * self.grid_cols + cols[None, :]).ravel()
        return np.sort(idx).astype(np.int64)


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.dot(v, v))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def gen_synthetic(spec: SyntheticSpec) -> FixtureContainer:
    """Generate one fixture; identical specs yield bitwise-identical output."""
    n = spec.n_patches
    d = spec.dim
    s = spec.signal_strength
    planted = spec.planted_indices()
    planted_set = set(planted.tolist())

    gauss = GaussianStream(Xoshiro256StarStar(spec.seed))
    t = _unit(gauss.fill(d))

    embeddings = np.empty((n, d), dtype=np.float64)
    for i in range(n):
        g = gauss.fill(d)
        if i in planted_set:
            v = s * t + (1.0 - s) * g
        else:
            v = g - np.dot(g, t) * t
        embeddings[i] = _unit(v)

    n_background = n - planted.size
    cls_row = np.zeros(n + 1, dtype=np.float64)
    cls_row[1 + planted] = s / planted.size
    if n_background > 0:
        background = np.setdiff1d(np.arange(n), planted)
        cls_row[1 + background] = (1.0 - s) / n_background
    patch_row = np.full(n + 1, 1.0 / (n + 1), dtype=np.float64)

    head = np.empty((n + 1, n + 1), dtype=np.float64)
    head[0] = cls_row
    head[1:] = patch_row
    head /= head.sum(axis=1, keepdims=True)
    attention = np.broadcast_to(head, (spec.heads, n + 1, n + 1)).copy()

    tensors = {
        "patch_embeddings": embeddings.astype(np.float32),
        "attention": attention.astype(np.float32),
        "text_embedding": t.astype(np.float32),
        "planted_indices": planted.astype(np.float32),
    }
    metadata = {
        "n_patches": n,
        "d_visual": d,
        "d_text": d,
        "grid_rows": spec.grid_rows,
        "grid_cols": spec.grid_cols,
        "heads": spec.heads,
        "prompt": "synthetic",
        "seed": spec.seed,
        "signal_strength": spec.signal_strength,
        "planted_block": [
            spec.planted_row,
            spec.planted_col,
            spec.planted_height,
            spec.planted_width,
        ],
    }
    return FixtureContainer(tensors=tensors, metadata=metadata)
