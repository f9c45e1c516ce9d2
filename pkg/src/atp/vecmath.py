"""Dense vector arithmetic shared by the scoring modules.

Inputs may be stored in float32 (the container format's storage precision);
every reduction here accumulates in float64.
"""

from __future__ import annotations

import numpy as np


def _as_f64_vector(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    return arr


def dot(a, b) -> float:
    """Dot product, accumulated in double precision."""
    av = _as_f64_vector(a, "a")
    bv = _as_f64_vector(b, "b")
    if av.shape[0] != bv.shape[0]:
        raise ValueError(f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}")
    return float(np.dot(av, bv))


def l2_norm(a) -> float:
    """Euclidean norm sqrt(dot(a, a)); always non-negative."""
    av = _as_f64_vector(a, "a")
    return float(np.sqrt(np.dot(av, av)))


def cosine(a, b) -> float:
    """Cosine similarity, clamped to [-1, 1] to absorb rounding.

    Raises ValueError if either argument has zero norm, naming the
    degenerate one.
    """
    av = _as_f64_vector(a, "a")
    bv = _as_f64_vector(b, "b")
    if av.shape[0] != bv.shape[0]:
        raise ValueError(f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}")
    na = float(np.sqrt(np.dot(av, av)))
    nb = float(np.sqrt(np.dot(bv, bv)))
    if na == 0.0:
        raise ValueError("cosine undefined: first argument has zero norm")
    if nb == 0.0:
        raise ValueError("cosine undefined: second argument has zero norm")
    c = float(np.dot(av, bv)) / (na * nb)
    return min(1.0, max(-1.0, c))


def minmax_normalize(scores) -> np.ndarray:
    """Affinely map scores onto [0, 1].

    Non-constant input maps min -> 0 and max -> 1; a constant vector maps
    to all 0.5 so that a signal-free modality stays neutral under fusion.
    Ranking (including ties) is preserved.
    """
    s = _as_f64_vector(scores, "scores")
    if s.shape[0] == 0:
        raise ValueError("cannot normalize an empty score vector")
    lo = float(np.min(s))
    hi = float(np.max(s))
    if hi == lo:
        return np.full_like(s, 0.5)
    return (s - lo) / (hi - lo)
