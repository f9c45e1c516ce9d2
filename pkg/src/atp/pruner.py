"""Score fusion, top-K selection, and the pruning pipeline.

The pipeline normalizes both saliency signals onto [0, 1], fuses them with
weight alpha (alpha -> 1 is query-focused, alpha -> 0 is objectness-driven),
keeps the K highest-fused tokens with deterministic lower-index-wins tie
breaking, and emits the survivors in their original spatial order so the
downstream consumer sees an unreordered positional sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import GaussianStream, Xoshiro256StarStar, stream_seed
from .saliency import (
    AttentionMap,
    PatchTokenSet,
    ProjectionMatrix,
    TextEmbedding,
    inter_scores,
    intra_cls,
    intra_rowsum,
)
from .vecmath import minmax_normalize

INTRA_MODES = ("cls_row", "row_sum")

DEFAULT_ALPHA = 0.5
DEFAULT_KEEP_RATIO = 0.6


@dataclass(frozen=True)
class PruneConfig:
    """Pruning knobs: fusion weight, keep budget, intra mode, probe seed.

    The keep budget is either a ratio in (0, 1] or an absolute count K >= 1,
    never both. With neither given the ratio defaults to 0.6.
    """

    alpha: float = DEFAULT_ALPHA
    keep_ratio: float | None = None
    keep_k: int | None = None
    intra_mode: str = "cls_row"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.keep_ratio is not None and self.keep_k is not None:
            raise ValueError("give keep_ratio or keep_k, not both")
        if self.keep_ratio is None and self.keep_k is None:
            object.__setattr__(self, "keep_ratio", DEFAULT_KEEP_RATIO)
        if self.keep_ratio is not None and not 0.0 < self.keep_ratio <= 1.0:
            raise ValueError(f"keep_ratio must lie in (0, 1], got {self.keep_ratio}")
        if self.keep_k is not None and self.keep_k < 1:
            raise ValueError(f"keep_k must be >= 1, got {self.keep_k}")
        if self.intra_mode not in INTRA_MODES:
            raise ValueError(f"intra_mode must be one of {INTRA_MODES}, got {self.intra_mode!r}")
        if self.seed < 0 or self.seed > 0xFFFFFFFFFFFFFFFF:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def resolve_k(self, n_patches: int) -> int:
        """Keep count for an N-token input; ratios round half away from zero."""
        if self.keep_k is not None:
            return min(self.keep_k, n_patches)
        k = math.floor(self.keep_ratio * n_patches + 0.5)
        return min(max(1, k), n_patches)


@dataclass(frozen=True)
class PruneResult:
    """Kept set plus every intermediate score vector, for diagnostics."""

    kept_indices: np.ndarray
    mask: np.ndarray
    inter_raw: np.ndarray
    intra_raw: np.ndarray
    inter_norm: np.ndarray
    intra_norm: np.ndarray
    fused: np.ndarray
    config: PruneConfig
    k: int

    @property
    def n_patches(self) -> int:
        return self.mask.shape[0]


def fuse(inter_norm, intra_norm, alpha: float) -> np.ndarray:
    """Convex combination alpha*inter + (1-alpha)*intra, elementwise."""
    a = np.asarray(inter_norm, dtype=np.float64)
    b = np.asarray(intra_norm, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"score length mismatch: {a.shape} vs {b.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * a + (1.0 - alpha) * b


def top_k(scores, k: int) -> np.ndarray:
    """Indices of the min(k, N) largest scores, ascending by index.

    Ties are broken toward the lower index, so selection is a total
    deterministic order. k must be at least 1: something always survives.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] == 0:
        raise ValueError("scores must be a non-empty vector")
    if k < 1:
        raise ValueError("k must be >= 1; at least one token must survive")
    k = min(k, s.shape[0])
    order = np.argsort(-s, kind="stable")
    return np.sort(order[:k])


def apply_prune(patches: PatchTokenSet, kept) -> PatchTokenSet:
    """Gather the kept embedding rows, preserving original order.

    The result carries no grid metadata: a pruned set is no longer
    rectangular and is described only by its kept count.
    """
    idx = np.asarray(kept, dtype=np.int64)
    if idx.ndim != 1 or idx.shape[0] == 0:
        raise ValueError("kept index list must be non-empty")
    if np.any(idx < 0) or np.any(idx >= patches.n_patches):
        raise ValueError(f"kept indices must lie in [0, {patches.n_patches - 1}]")
    if np.any(np.diff(idx) <= 0):
        raise ValueError("kept indices must be strictly ascending")
    return PatchTokenSet(embeddings=patches.embeddings[idx])


def atp_pipeline(
    patches: PatchTokenSet,
    attn: AttentionMap,
    text: TextEmbedding,
    projection: ProjectionMatrix | None = None,
    config: PruneConfig | None = None,
) -> PruneResult:
    """Score, fuse, and select: the full single-shot pruning pass.

    Deterministic for fixed inputs and config; identical runs produce
    bitwise-identical results.
    """
    cfg = config if config is not None else PruneConfig()
    if attn.n_patches != patches.n_patches:
        raise ValueError(
            f"attention covers {attn.n_patches} patches but token set has {patches.n_patches}"
        )
    inter_raw = inter_scores(patches, text, projection)
    if cfg.intra_mode == "cls_row":
        intra_raw = intra_cls(attn)
    else:
        intra_raw = intra_rowsum(attn)
    inter_norm = minmax_normalize(inter_raw)
    intra_norm = minmax_normalize(intra_raw)
    fused = fuse(inter_norm, intra_norm, cfg.alpha)
    k = cfg.resolve_k(patches.n_patches)
    kept = top_k(fused, k)
    mask = np.zeros(patches.n_patches, dtype=bool)
    mask[kept] = True
    return PruneResult(
        kept_indices=kept,
        mask=mask,
        inter_raw=inter_raw,
        intra_raw=intra_raw,
        inter_norm=inter_norm,
        intra_norm=intra_norm,
        fused=fused,
        config=cfg,
        k=k,
    )


def jaccard(a, b) -> float:
    """Jaccard overlap |A & B| / |A | B| of two index sets."""
    sa, sb = set(np.asarray(a).tolist()), set(np.asarray(b).tolist())
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


@dataclass(frozen=True)
class StabilitySummary:
    """Kept-set overlap statistics under embedding noise."""

    sigma: float
    trials: int
    mean_jaccard: float
    min_jaccard: float
    max_jaccard: float
    per_trial: tuple[float, ...] = field(repr=False)


def kept_set_stability(
    patches: PatchTokenSet,
    attn: AttentionMap,
    text: TextEmbedding,
    projection: ProjectionMatrix | None = None,
    config: PruneConfig | None = None,
    sigma: float = 0.0,
    trials: int = 1,
) -> StabilitySummary:
    """Probe kept-set stability under i.i.d. Gaussian embedding noise.

    Each trial adds zero-mean noise of standard deviation sigma to every
    patch embedding entry (attention is left untouched, isolating the
    inter-modal pathway), reruns the pipeline, and records the Jaccard
    overlap with the noiseless kept set. Trial t's noise stream is derived
    from (config.seed, t) alone, so results are independent of execution
    order and reproducible bit for bit.
    """
    cfg = config if config is not None else PruneConfig()
    if sigma < 0.0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite and >= 0, got {sigma}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    baseline = atp_pipeline(patches, attn, text, projection, cfg)
    base_f64 = patches.embeddings.astype(np.float64)
    n, d = base_f64.shape

    overlaps = []
    for t in range(trials):
        gauss = GaussianStream(Xoshiro256StarStar(stream_seed(cfg.seed, t)))
        noise = gauss.fill(n * d).reshape(n, d)
        noisy = PatchTokenSet(
            embeddings=base_f64 + sigma * noise,
            grid_rows=patches.grid_rows,
            grid_cols=patches.grid_cols,
        )
        result = atp_pipeline(noisy, attn, text, projection, cfg)
        overlaps.append(jaccard(baseline.kept_indices, result.kept_indices))

    return StabilitySummary(
        sigma=sigma,
        trials=trials,
        mean_jaccard=float(np.mean(overlaps)),
        min_jaccard=float(np.min(overlaps)),
        max_jaccard=float(np.max(overlaps)),
        per_trial=tuple(overlaps),
    )
