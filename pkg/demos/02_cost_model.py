#!/usr/bin/env python3
"""Prefill cost model: what pruning visual tokens buys at the 7B scale.

Sweeps keep ratios for a 32-layer, 4096-wide decoder fed 256 visual tokens
plus a short text prompt, and prints the relative FLOPs, kv-cache, and the
modeled end-to-end speedup at a 15% decode share.
"""

from atp import LMShape, latency_speedup, relative_report

shape = LMShape(layers=32, hidden=4096, kv_bytes_per_element=2)
n_visual = 256
text_len = 32

print(f"model: {shape.layers} layers, d={shape.hidden}, "
      f"{shape.kv_bytes_per_element} B/kv element")
print(f"prefix: {n_visual} visual + {text_len} text tokens\n")

print(f"{'keep':>5} {'K':>4} {'rel FLOPs (visual)':>19} {'rel FLOPs (full)':>17} "
      f"{'rel kv':>7} {'speedup':>8}")
for ratio in (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0):
    k = max(1, round(ratio * n_visual))
    rep = relative_report(n_visual, k, text_len, shape, decode_fraction=0.15)
    print(f"{ratio:>5.0%} {k:>4} {rep.rel_flops_visual_only:>19.4f} "
          f"{rep.rel_flops_full_seq:>17.4f} {rep.rel_kv:>7.4f} "
          f"{rep.modeled_speedup:>7.2f}x")

# The 60% operating point: ~0.6x FLOPs, and with a 15% decode share the
# modeled end-to-end speedup lands right around 1.5x.
rep = relative_report(n_visual, 154, 0, shape, decode_fraction=0.15)
print(f"\nkeeping 154/256 tokens: rel visual FLOPs = {rep.rel_flops_visual_only:.4f}")
print(f"speedup at prefill ratio 0.6, decode share 0.15: "
      f"{latency_speedup(0.6, 0.15):.4f}x")

# Decode share is the tunable that dilutes prefill savings.
print("\nspeedup at rel prefill 0.6 vs decode share:")
for f in (0.0, 0.1, 0.15, 0.3, 0.5, 1.0):
    print(f"  f={f:<4} -> {latency_speedup(0.6, f):.3f}x")
