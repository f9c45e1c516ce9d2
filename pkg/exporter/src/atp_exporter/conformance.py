"""Cross-implementation format conformance fixture.

Re-implements the consuming engine's deterministic synthetic generator for
one small fixed shape (4x4 grid, dim 8, 2 heads, 2x2 block planted at row 1
col 1, signal strength 0.9) and writes it through this package's own ATPF
writer. For any shared seed the two implementations must produce
byte-identical files; the test suite holds them to that.

The shared recipe, pinned to the bit:

* splitmix64 expands the seed into xoshiro256** state; uniforms take the
  top 53 bits; Gaussians come from Box-Muller (u1 = 1 - uniform,
  u2 = uniform, emit r*cos then r*sin, spare cached across calls) using
  scalar libm, not vectorized math.
* Text vector: dim draws, normalized by sqrt(dot(v, v)) in float64.
* Per patch in row-major order: dim draws g; planted rows use
  s*t + (1-s)*g, background rows use g - dot(g, t)*t; each normalized the
  same way.
* Attention: CLS row spreads mass s over planted keys and 1-s over
  background keys, patch rows are uniform over all keys, every row divided by
  its float64 sum; all heads identical.
* float64 throughout, one float32 cast at the end.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .atpf import write_atpf

GRID_ROWS = 4
GRID_COLS = 4
DIM = 8
HEADS = 2
BLOCK = (1, 1, 2, 2)  # row, col, height, width
SIGNAL = 0.9

_M64 = 0xFFFFFFFFFFFFFFFF
_TWO_PI = 6.283185307179586


def _splitmix64(state: int) -> Iterator[int]:
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        yield z ^ (z >> 31)


def _xoshiro256ss(seed: int) -> Iterator[int]:
    sm = _splitmix64(seed)
    s0, s1, s2, s3 = next(sm), next(sm), next(sm), next(sm)
    rotl = lambda x, k: ((x << k) | (x >> (64 - k))) & _M64  # noqa: E731
    while True:
        yield (rotl((s1 * 5) & _M64, 7) * 9) & _M64
        t = (s1 << 17) & _M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = rotl(s3, 45)


def _gaussians(seed: int) -> Iterator[float]:
    bits = _xoshiro256ss(seed)
    while True:
        u1 = 1.0 - (next(bits) >> 11) * 2.0**-53
        u2 = (next(bits) >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        yield r * math.cos(_TWO_PI * u2)
        yield r * math.sin(_TWO_PI * u2)


def _take(gen: Iterator[float], count: int) -> np.ndarray:
    return np.array([next(gen) for _ in range(count)], dtype=np.float64)


def _normalized(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt(np.dot(v, v))


def planted_indices() -> list[int]:
    row0, col0, height, width = BLOCK
    return sorted(
        r * GRID_COLS + c
        for r in range(row0, row0 + height)
        for c in range(col0, col0 + width)
    )


def synthetic_fixture(seed: int) -> tuple[dict[str, np.ndarray], dict]:
    """Tensors and metadata of the conformance fixture for one seed."""
    n = GRID_ROWS * GRID_COLS
    planted = planted_indices()
    planted_set = set(planted)

    gauss = _gaussians(seed)
    t = _normalized(_take(gauss, DIM))

    rows = []
    for i in range(n):
        g = _take(gauss, DIM)
        if i in planted_set:
            v = SIGNAL * t + (1.0 - SIGNAL) * g
        else:
            v = g - np.dot(g, t) * t
        rows.append(_normalized(v))
    embeddings = np.stack(rows)

    background = [i for i in range(n) if i not in planted_set]
    head = np.empty((n + 1, n + 1), dtype=np.float64)
    cls_row = np.zeros(n + 1, dtype=np.float64)
    for i in planted:
        cls_row[1 + i] = SIGNAL / len(planted)
    for i in background:
        cls_row[1 + i] = (1.0 - SIGNAL) / len(background)
    head[0] = cls_row
    head[1:] = 1.0 / (n + 1)
    head /= head.sum(axis=1, keepdims=True)
    attention = np.stack([head] * HEADS)

    tensors = {
        "patch_embeddings": embeddings.astype(np.float32),
        "attention": attention.astype(np.float32),
        "text_embedding": t.astype(np.float32),
        "planted_indices": np.array(planted, dtype=np.float32),
    }
    metadata = {
        "n_patches": n,
        "d_visual": DIM,
        "d_text": DIM,
        "grid_rows": GRID_ROWS,
        "grid_cols": GRID_COLS,
        "heads": HEADS,
        "prompt": "synthetic",
        "seed": seed,
        "signal_strength": SIGNAL,
        "planted_block": list(BLOCK),
    }
    return tensors, metadata


def export_synthetic_check(seed: int, out_path) -> None:
    """Write the conformance fixture for a seed."""
    tensors, metadata = synthetic_fixture(seed)
    write_atpf(out_path, tensors, metadata)
