"""Per-patch saliency signals for visual token pruning.

Two complementary signals are computed for every patch token:

* intra-modal saliency -- derived from the vision encoder's final-layer
  attention map. The default mode reads the CLS query row (how much the
  classification token attends to each patch, an objectness cue); an
  alternate mode sums each patch query row over all keys.
* inter-modal relevance -- cosine similarity between each patch embedding
  and a text-prompt embedding, optionally through a projection matrix
  when the two embedding spaces have different widths.

Both are returned as length-N score vectors over the patch tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATTENTION_ROW_SUM_TOL = 1e-4

_FLOAT_DTYPES = (np.float32, np.float64)


def _check_float_array(arr: np.ndarray, name: str) -> np.ndarray:
    if arr.dtype not in _FLOAT_DTYPES:
        arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PatchTokenSet:
    """N patch embeddings, one row per patch, in row-major grid order.

    grid_rows/grid_cols describe the spatial layout when the set is
    rectangular; a pruned set carries no grid and is described only by its
    kept count (``n_patches``).
    """

    embeddings: np.ndarray
    grid_rows: int | None = None
    grid_cols: int | None = None

    def __post_init__(self):
        emb = np.asarray(self.embeddings)
        if emb.ndim != 2:
            raise ValueError(f"embeddings must be N x D, got shape {emb.shape}")
        if emb.shape[0] < 1 or emb.shape[1] < 1:
            raise ValueError(f"embeddings must be non-empty, got shape {emb.shape}")
        object.__setattr__(self, "embeddings", _check_float_array(emb, "embeddings"))
        if (self.grid_rows is None) != (self.grid_cols is None):
            raise ValueError("grid_rows and grid_cols must be given together")
        if self.grid_rows is not None:
            if self.grid_rows < 1 or self.grid_cols < 1:
                raise ValueError("grid dimensions must be positive")
            if self.grid_rows * self.grid_cols != emb.shape[0]:
                raise ValueError(
                    f"grid {self.grid_rows}x{self.grid_cols} does not cover "
                    f"{emb.shape[0]} patches"
                )

    @property
    def n_patches(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @property
    def has_grid(self) -> bool:
        return self.grid_rows is not None


@dataclass(frozen=True)
class AttentionMap:
    """Final-layer multi-head attention over (CLS + N patches).

    weights has shape [H, N+1, N+1]; rows are queries, columns are keys,
    index 0 is CLS and 1..N are patches. Every row of every head must be
    a probability distribution: entries in [0, 1], summing to 1 within
    ATTENTION_ROW_SUM_TOL.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 3 or w.shape[1] != w.shape[2]:
            raise ValueError(f"attention must be H x (N+1) x (N+1), got shape {w.shape}")
        if w.shape[0] < 1 or w.shape[1] < 2:
            raise ValueError("attention needs at least one head and one patch")
        w = _check_float_array(w, "attention")
        if np.min(w) < 0.0 or np.max(w) > 1.0:
            raise ValueError("attention entries must lie in [0, 1]")
        row_sums = w.sum(axis=2, dtype=np.float64)
        if np.max(np.abs(row_sums - 1.0)) > ATTENTION_ROW_SUM_TOL:
            bad = np.unravel_index(int(np.argmax(np.abs(row_sums - 1.0))), row_sums.shape)
            raise ValueError(
                f"attention row (head {bad[0]}, query {bad[1]}) sums to "
                f"{row_sums[bad]:.6f}, outside 1 +/- {ATTENTION_ROW_SUM_TOL}"
            )
        object.__setattr__(self, "weights", w)

    @property
    def heads(self) -> int:
        return self.weights.shape[0]

    @property
    def n_patches(self) -> int:
        return self.weights.shape[1] - 1


@dataclass(frozen=True)
class TextEmbedding:
    """A single text-encoder vector; must be finite with positive norm."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector)
        if v.ndim != 1 or v.shape[0] < 1:
            raise ValueError(f"text embedding must be a non-empty vector, got shape {v.shape}")
        v = _check_float_array(v, "text embedding")
        if not np.any(v != 0.0):
            raise ValueError("text embedding has zero norm")
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class ProjectionMatrix:
    """D_v x D_t map taking patch embeddings into the text embedding space."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise ValueError(f"projection must be D_v x D_t, got shape {m.shape}")
        object.__setattr__(self, "matrix", _check_float_array(m, "projection"))


def intra_cls(attn: AttentionMap) -> np.ndarray:
    """Intra-modal saliency from the CLS attention row.

    Attention is averaged over heads, the CLS query row is read, the CLS
    self-attention entry is discarded, and the remaining CLS-to-patch mass
    is renormalized to sum to 1. Raises ValueError when the CLS row puts
    no mass on patches at all (softmax attention never does in practice).
    """
    mean_attn = attn.weights.astype(np.float64).mean(axis=0)
    raw = mean_attn[0, 1:]
    z = float(raw.sum())
    if z <= 0.0:
        raise ValueError("CLS row carries no attention mass on patches")
    return raw / z


def intra_rowsum(attn: AttentionMap) -> np.ndarray:
    """Alternate intra-modal mode: per-patch-query row sums.

    For each patch query row i (rows 1..N), sums head-averaged attention
    over all N+1 keys, then normalizes the N sums to 1. Row-stochastic
    attention makes this uniform up to the row-sum tolerance; the mode
    exists for attention maps whose rows deviate within that tolerance.
    """
    mean_attn = attn.weights.astype(np.float64).mean(axis=0)
    raw = mean_attn[1:, :].sum(axis=1)
    z = float(raw.sum())
    if z <= 0.0:
        raise ValueError("attention rows carry no mass")
    return raw / z


def inter_scores(
    patches: PatchTokenSet,
    text: TextEmbedding,
    projection: ProjectionMatrix | None = None,
) -> np.ndarray:
    """Inter-modal relevance: cosine of each patch row against the text vector.

    When the patch and text dimensions differ, an explicit projection must be
    supplied; the engine never invents one. Scores lie in [-1, 1].
    """
    emb = patches.embeddings.astype(np.float64)
    tvec = text.vector.astype(np.float64)
    if projection is not None:
        proj = projection.matrix.astype(np.float64)
        if proj.shape[0] != patches.dim or proj.shape[1] != text.dim:
            raise ValueError(
                f"projection shape {proj.shape} does not map patch dim "
                f"{patches.dim} to text dim {text.dim}"
            )
        emb = emb @ proj
    elif patches.dim != text.dim:
        raise ValueError(
            f"patch dim {patches.dim} != text dim {text.dim} and no projection given"
        )

    norms = np.sqrt(np.einsum("ij,ij->i", emb, emb))
    zero_rows = np.flatnonzero(norms == 0.0)
    if zero_rows.size:
        raise ValueError(f"patch row {int(zero_rows[0])} has zero norm")
    tnorm = float(np.sqrt(np.dot(tvec, tvec)))
    scores = (emb @ tvec) / (norms * tnorm)
    return np.clip(scores, -1.0, 1.0)
