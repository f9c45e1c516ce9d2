"""Standalone ATPF container writer.

Implements the normative byte layout independently of the consuming engine:

    bytes 0-3    magic "ATPF"
    bytes 4-7    version, u32 little-endian (1)
    bytes 8-15   manifest length, u64 little-endian
    manifest     canonical JSON: sorted keys, "," / ":" separators, ASCII
    payload      raw tensors, row-major little-endian float32, laid out
                 contiguously in ascending name order

The manifest is {"metadata": ..., "tensors": {name: {dtype, shape, offset,
length}}, "version": 1}. Shape or invariant problems raise before any bytes
are written; a half-written fixture is worse than no fixture.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"ATPF"
VERSION = 1

ATTENTION_ROW_SUM_TOL = 1e-4


class ExportShapeError(ValueError):
    """Tensor shapes or invariants are inconsistent; nothing gets written."""


def _check(tensors: dict[str, np.ndarray], metadata: dict) -> None:
    for name in ("patch_embeddings", "attention", "text_embedding"):
        if name not in tensors:
            raise ExportShapeError(f"required tensor {name!r} is missing")
    for name, arr in tensors.items():
        if arr.dtype != np.float32:
            raise ExportShapeError(f"tensor {name!r} must be float32, got {arr.dtype}")
        if not np.all(np.isfinite(arr)):
            raise ExportShapeError(f"tensor {name!r} contains non-finite values")

    n = metadata["n_patches"]
    d_v = metadata["d_visual"]
    d_t = metadata["d_text"]
    heads = metadata["heads"]
    if tensors["patch_embeddings"].shape != (n, d_v):
        raise ExportShapeError(
            f"patch_embeddings is {tensors['patch_embeddings'].shape}, expected ({n}, {d_v})"
        )
    if tensors["attention"].shape != (heads, n + 1, n + 1):
        raise ExportShapeError(
            f"attention is {tensors['attention'].shape}, expected ({heads}, {n + 1}, {n + 1})"
        )
    if tensors["text_embedding"].shape != (d_t,):
        raise ExportShapeError(
            f"text_embedding is {tensors['text_embedding'].shape}, expected ({d_t},)"
        )
    if "projection" in tensors and tensors["projection"].shape != (d_v, d_t):
        raise ExportShapeError(
            f"projection is {tensors['projection'].shape}, expected ({d_v}, {d_t})"
        )
    grid_rows = metadata.get("grid_rows")
    grid_cols = metadata.get("grid_cols")
    if grid_rows is not None and grid_rows * grid_cols != n:
        raise ExportShapeError(f"grid {grid_rows}x{grid_cols} does not cover {n} patches")

    attn = tensors["attention"].astype(np.float64)
    row_sums = attn.sum(axis=2)
    if np.max(np.abs(row_sums - 1.0)) > ATTENTION_ROW_SUM_TOL:
        raise ExportShapeError(
            f"attention rows deviate from sum 1 by more than {ATTENTION_ROW_SUM_TOL}"
        )
    if np.min(attn) < 0.0 or np.max(attn) > 1.0:
        raise ExportShapeError("attention entries fall outside [0, 1]")


def write_atpf(path, tensors: dict[str, np.ndarray], metadata: dict) -> None:
    """Validate and write one container file."""
    _check(tensors, metadata)

    entries: dict[str, dict] = {}
    payload = bytearray()
    for name in sorted(tensors):
        raw = np.ascontiguousarray(tensors[name]).tobytes()
        entries[name] = {
            "dtype": "float32",
            "shape": list(tensors[name].shape),
            "offset": len(payload),
            "length": len(raw),
        }
        payload.extend(raw)

    manifest = {"metadata": metadata, "tensors": entries, "version": VERSION}
    blob = json.dumps(
        manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(bytes(payload))
