"""Shared randomized-input builders and independent oracles for the tests.

Oracles here deliberately avoid the library's own code paths: sums are
sequential Python loops, sorting goes through Python's stable sort, and
selection expectations come from full sorts rather than argpartitions.
"""

from __future__ import annotations

import math

import numpy as np

from atp import AttentionMap, FixtureContainer, PatchTokenSet, SyntheticSpec, TextEmbedding


def seq_dot(a, b) -> float:
    """Naive left-to-right float64 summation oracle."""
    total = 0.0
    for x, y in zip(a, b):
        total += float(x) * float(y)
    return total


def seq_norm(a) -> float:
    return math.sqrt(seq_dot(a, a))


def cosine_oracle(a, b) -> float:
    return seq_dot(a, b) / (seq_norm(a) * seq_norm(b))


def minmax_oracle(scores) -> list[float]:
    values = [float(x) for x in scores]
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.5] * len(values)
    return [(x - lo) / (hi - lo) for x in values]


def top_k_oracle(scores, k: int) -> list[int]:
    """Full sort by (-score, index), take k, re-sort by index."""
    n = len(scores)
    ranked = sorted(range(n), key=lambda i: (-float(scores[i]), i))
    return sorted(ranked[: min(k, n)])


def scores_with_duplicates(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random score vector with deliberately injected ties."""
    s = rng.random(n)
    if n >= 4:
        dup_count = int(rng.integers(2, max(3, n // 3) + 1))
        src = rng.integers(0, n, size=dup_count)
        dst = rng.integers(0, n, size=dup_count)
        s[dst] = s[src]
    return s


def rand_attention(rng: np.random.Generator, n: int, heads: int = 1) -> np.ndarray:
    """Random row-stochastic attention weights, float32, [H, N+1, N+1]."""
    w = rng.random((heads, n + 1, n + 1)).astype(np.float64) + 1e-3
    w /= w.sum(axis=2, keepdims=True)
    return w.astype(np.float32)


def rand_inputs(rng: np.random.Generator, n: int, dim: int, heads: int = 2):
    """A random (patches, attention, text) triple with matching dims."""
    patches = PatchTokenSet(
        embeddings=rng.standard_normal((n, dim)).astype(np.float32)
    )
    attn = AttentionMap(weights=rand_attention(rng, n, heads))
    text = TextEmbedding(vector=rng.standard_normal(dim).astype(np.float32))
    return patches, attn, text


def rand_fixture(rng: np.random.Generator) -> FixtureContainer:
    """Random valid fixture container, sometimes with the optional tensors."""
    n = int(rng.integers(1, 25))
    d_v = int(rng.integers(1, 17))
    heads = int(rng.integers(1, 4))
    with_proj = bool(rng.random() < 0.4)
    d_t = int(rng.integers(1, 17)) if with_proj else d_v

    tensors = {
        "patch_embeddings": rng.standard_normal((n, d_v)).astype(np.float32),
        "attention": rand_attention(rng, n, heads),
        "text_embedding": (rng.standard_normal(d_t) + 0.1).astype(np.float32),
    }
    if with_proj:
        tensors["projection"] = rng.standard_normal((d_v, d_t)).astype(np.float32)
    if rng.random() < 0.5:
        count = int(rng.integers(1, n + 1))
        planted = np.sort(rng.choice(n, size=count, replace=False))
        tensors["planted_indices"] = planted.astype(np.float32)

    metadata = {
        "n_patches": n,
        "d_visual": d_v,
        "d_text": d_t,
        "heads": heads,
        "prompt": f"fixture-{int(rng.integers(0, 10**6))}",
        "grid_rows": None,
        "grid_cols": None,
    }
    if rng.random() < 0.5:
        for rows in range(int(math.isqrt(n)), 0, -1):
            if n % rows == 0:
                metadata["grid_rows"] = rows
                metadata["grid_cols"] = n // rows
                break
    return FixtureContainer(tensors=tensors, metadata=metadata)


def default_synth_spec(seed: int = 42, **overrides) -> SyntheticSpec:
    params = dict(
        grid_rows=16,
        grid_cols=16,
        dim=32,
        heads=2,
        planted_row=5,
        planted_col=6,
        planted_height=4,
        planted_width=4,
        signal_strength=0.9,
        seed=seed,
    )
    params.update(overrides)
    return SyntheticSpec(**params)


def container_bytes_equal(a: FixtureContainer, b: FixtureContainer) -> bool:
    if set(a.tensors) != set(b.tensors) or a.metadata != b.metadata:
        return False
    return all(
        a.tensors[k].shape == b.tensors[k].shape
        and a.tensors[k].tobytes() == b.tensors[k].tobytes()
        for k in a.tensors
    )
