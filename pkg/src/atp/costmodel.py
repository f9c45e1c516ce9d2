"""Analytical prefill FLOPs, kv-cache, and latency model.

Per transformer layer, one token costs roughly 24*d^2 FLOPs in projections
(QKVO ~ 8*d^2, a 4x-expansion two-matrix MLP ~ 16*d^2) plus the attention
score/value matmuls, which are quadratic in sequence length:

    prefill_flops(S) = L * (24 * d^2 * S + 4 * d * S^2)

Biases, normalization layers, and embedding lookups are excluded: they are
second-order for the length ratios this model is used to report. End-to-end
speedup follows an Amdahl split between the prefill fraction (scaled by
pruning) and a decode fraction that pruning leaves unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LMShape:
    """Downstream language-model dimensions for cost accounting."""

    layers: int
    hidden: int
    kv_bytes_per_element: int = 2

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")
        if self.kv_bytes_per_element < 1:
            raise ValueError(
                f"kv_bytes_per_element must be >= 1, got {self.kv_bytes_per_element}"
            )


def prefill_flops(seq_len: int, shape: LMShape) -> float:
    """FLOPs to prefill a sequence of seq_len tokens."""
    if seq_len < 0:
        raise ValueError(f"seq_len must be >= 0, got {seq_len}")
    s = float(seq_len)
    d = float(shape.hidden)
    return shape.layers * (24.0 * d * d * s + 4.0 * d * s * s)


def kv_bytes(seq_len: int, shape: LMShape) -> int:
    """Key/value cache bytes for a seq_len-token prefix (keys + values)."""
    if seq_len < 0:
        raise ValueError(f"seq_len must be >= 0, got {seq_len}")
    return 2 * shape.layers * seq_len * shape.hidden * shape.kv_bytes_per_element


def latency_speedup(rel_prefill: float, decode_fraction: float) -> float:
    """Amdahl end-to-end speedup when prefill cost scales by rel_prefill.

    1 / ((1 - f) * rel_prefill + f): the prefill share (1 - f) shrinks with
    pruning while the decode share f is untouched.
    """
    if rel_prefill <= 0.0:
        raise ValueError(f"rel_prefill must be > 0, got {rel_prefill}")
    if not 0.0 <= decode_fraction <= 1.0:
        raise ValueError(f"decode_fraction must lie in [0, 1], got {decode_fraction}")
    return 1.0 / ((1.0 - decode_fraction) * rel_prefill + decode_fraction)


@dataclass(frozen=True)
class CostReport:
    """Absolute and relative prefill costs for full vs pruned sequences.

    rel_flops_visual_only is the linear-term visual ratio K/N with text
    excluded; rel_flops_full_seq divides the modeled prefill FLOPs at
    sequence lengths K+T and N+T, so it also reflects the quadratic
    attention term.
    """

    flops_full: float
    flops_pruned: float
    rel_flops_full_seq: float
    rel_flops_visual_only: float
    kv_full: int
    kv_pruned: int
    rel_kv: float
    modeled_speedup: float
    n_tokens: int
    k_tokens: int
    text_len: int
    decode_fraction: float

    def to_dict(self) -> dict:
        return {
            "flops_full": self.flops_full,
            "flops_pruned": self.flops_pruned,
            "rel_flops_full_seq": self.rel_flops_full_seq,
            "rel_flops_visual_only": self.rel_flops_visual_only,
            "kv_full_bytes": self.kv_full,
            "kv_pruned_bytes": self.kv_pruned,
            "rel_kv": self.rel_kv,
            "modeled_speedup": self.modeled_speedup,
            "n_tokens": self.n_tokens,
            "k_tokens": self.k_tokens,
            "text_len": self.text_len,
            "decode_fraction": self.decode_fraction,
        }


def relative_report(
    n_tokens: int,
    k_tokens: int,
    text_len: int,
    shape: LMShape,
    decode_fraction: float = 0.15,
) -> CostReport:
    """Cost comparison of keeping K of N visual tokens ahead of T text tokens."""
    if n_tokens < 1:
        raise ValueError(f"n_tokens must be >= 1, got {n_tokens}")
    if k_tokens < 1 or k_tokens > n_tokens:
        raise ValueError(f"k_tokens must lie in [1, {n_tokens}], got {k_tokens}")
    if text_len < 0:
        raise ValueError(f"text_len must be >= 0, got {text_len}")

    flops_full = prefill_flops(n_tokens + text_len, shape)
    flops_pruned = prefill_flops(k_tokens + text_len, shape)
    rel_full = flops_pruned / flops_full
    kv_full = kv_bytes(n_tokens + text_len, shape)
    kv_pruned = kv_bytes(k_tokens + text_len, shape)
    return CostReport(
        flops_full=flops_full,
        flops_pruned=flops_pruned,
        rel_flops_full_seq=rel_full,
        rel_flops_visual_only=k_tokens / n_tokens,
        kv_full=kv_full,
        kv_pruned=kv_pruned,
        rel_kv=kv_pruned / kv_full,
        modeled_speedup=latency_speedup(rel_full, decode_fraction),
        n_tokens=n_tokens,
        k_tokens=k_tokens,
        text_len=text_len,
        decode_fraction=decode_fraction,
    )
