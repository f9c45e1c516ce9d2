"""ATPF fixture container: the interchange format between components.

Byte layout (normative):

    bytes 0-3    magic "ATPF"
    bytes 4-7    format version, unsigned 32-bit little-endian (currently 1)
    bytes 8-15   manifest length M, unsigned 64-bit little-endian
    next M bytes UTF-8 JSON manifest
    remainder    raw tensor payload

The manifest is canonical JSON (keys sorted, separators "," and ":", ASCII
escapes) of the form::

    {"metadata": {...}, "tensors": {name: {"dtype", "shape", "offset",
     "length"}}, "version": 1}

All tensors are row-major IEEE-754 binary32, little-endian; offsets are
relative to the payload start and tensors are laid out contiguously in
ascending name order. Required tensors: patch_embeddings [N, D_v],
attention [H, N+1, N+1], text_embedding [D_t]. Optional: projection
[D_v, D_t], planted_indices [P] (integer-valued floats). Metadata carries
n_patches, d_visual, d_text, heads, grid_rows/grid_cols (null when the set
is not rectangular), and the prompt; synthetic fixtures add the generator
seed, signal strength, and planted block.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .saliency import (
    ATTENTION_ROW_SUM_TOL,
    AttentionMap,
    PatchTokenSet,
    ProjectionMatrix,
    TextEmbedding,
)

MAGIC = b"ATPF"
VERSION = 1

REQUIRED_TENSORS = ("patch_embeddings", "attention", "text_embedding")
OPTIONAL_TENSORS = ("projection", "planted_indices")


class FixtureError(Exception):
    """Base class for fixture container failures."""


class FixtureFormatError(FixtureError):
    """The file is not a fixture container at all (bad magic)."""


class FixtureVersionError(FixtureError):
    """The container declares a version this reader does not support."""


class FixtureCorruptionError(FixtureError):
    """Truncated payload, manifest bounds violations, or unparsable manifest."""


class FixtureValidationError(FixtureError):
    """Structurally sound container whose contents violate type invariants."""


@dataclass
class FixtureContainer:
    """Named float32 tensors plus a metadata dict, as stored on disk."""

    tensors: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def patch_token_set(self) -> PatchTokenSet:
        return PatchTokenSet(
            embeddings=self.tensors["patch_embeddings"],
            grid_rows=self.metadata.get("grid_rows"),
            grid_cols=self.metadata.get("grid_cols"),
        )

    def attention_map(self) -> AttentionMap:
        return AttentionMap(weights=self.tensors["attention"])

    def text_embedding(self) -> TextEmbedding:
        return TextEmbedding(vector=self.tensors["text_embedding"])

    def projection(self) -> ProjectionMatrix | None:
        if "projection" not in self.tensors:
            return None
        return ProjectionMatrix(matrix=self.tensors["projection"])

    def planted_indices(self) -> np.ndarray | None:
        if "planted_indices" not in self.tensors:
            return None
        return self.tensors["planted_indices"].astype(np.int64)

    @property
    def has_grid(self) -> bool:
        return self.metadata.get("grid_rows") is not None


def _require_meta(metadata: dict, key: str) -> int:
    if key not in metadata:
        raise FixtureValidationError(f"metadata is missing required field {key!r}")
    return metadata[key]


def validate_container(fix: FixtureContainer) -> None:
    """Check every type invariant; raise FixtureValidationError naming the culprit."""
    for name in REQUIRED_TENSORS:
        if name not in fix.tensors:
            raise FixtureValidationError(f"required tensor {name!r} is missing")
    for name, arr in fix.tensors.items():
        if arr.dtype != np.float32:
            raise FixtureValidationError(f"tensor {name!r} must be float32, got {arr.dtype}")
        if not np.all(np.isfinite(arr)):
            raise FixtureValidationError(f"tensor {name!r} contains non-finite values")

    n = _require_meta(fix.metadata, "n_patches")
    d_v = _require_meta(fix.metadata, "d_visual")
    d_t = _require_meta(fix.metadata, "d_text")
    heads = _require_meta(fix.metadata, "heads")
    if "prompt" not in fix.metadata:
        raise FixtureValidationError("metadata is missing required field 'prompt'")

    emb = fix.tensors["patch_embeddings"]
    if emb.shape != (n, d_v):
        raise FixtureValidationError(
            f"tensor 'patch_embeddings' has shape {emb.shape}, metadata says ({n}, {d_v})"
        )
    attn = fix.tensors["attention"]
    if attn.shape != (heads, n + 1, n + 1):
        raise FixtureValidationError(
            f"tensor 'attention' has shape {attn.shape}, metadata says ({heads}, {n + 1}, {n + 1})"
        )
    text = fix.tensors["text_embedding"]
    if text.shape != (d_t,):
        raise FixtureValidationError(
            f"tensor 'text_embedding' has shape {text.shape}, metadata says ({d_t},)"
        )
    if not np.any(text != 0.0):
        raise FixtureValidationError("tensor 'text_embedding' has zero norm")

    if np.min(attn) < 0.0 or np.max(attn) > 1.0:
        raise FixtureValidationError("tensor 'attention' has entries outside [0, 1]")
    row_sums = attn.sum(axis=2, dtype=np.float64)
    if np.max(np.abs(row_sums - 1.0)) > ATTENTION_ROW_SUM_TOL:
        raise FixtureValidationError(
            f"tensor 'attention' has rows deviating from sum 1 by more than "
            f"{ATTENTION_ROW_SUM_TOL}"
        )

    grid_rows = fix.metadata.get("grid_rows")
    grid_cols = fix.metadata.get("grid_cols")
    if (grid_rows is None) != (grid_cols is None):
        raise FixtureValidationError("grid_rows and grid_cols must be given together")
    if grid_rows is not None and grid_rows * grid_cols != n:
        raise FixtureValidationError(
            f"grid {grid_rows}x{grid_cols} does not cover {n} patches"
        )

    if "projection" in fix.tensors:
        proj = fix.tensors["projection"]
        if proj.shape != (d_v, d_t):
            raise FixtureValidationError(
                f"tensor 'projection' has shape {proj.shape}, expected ({d_v}, {d_t})"
            )
    if "planted_indices" in fix.tensors:
        planted = fix.tensors["planted_indices"]
        if planted.ndim != 1:
            raise FixtureValidationError("tensor 'planted_indices' must be 1-dimensional")
        as_int = planted.astype(np.int64)
        if np.any(as_int.astype(np.float32) != planted):
            raise FixtureValidationError("tensor 'planted_indices' holds non-integer values")
        if planted.size and (as_int.min() < 0 or as_int.max() >= n):
            raise FixtureValidationError(
                f"tensor 'planted_indices' has entries outside [0, {n - 1}]"
            )


def _canonical_manifest_bytes(manifest: dict) -> bytes:
    return json.dumps(
        manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")


def write_container(fix: FixtureContainer, path) -> None:
    """Validate and serialize a fixture; write-then-read is bitwise lossless."""
    validate_container(fix)
    names = sorted(fix.tensors)
    entries: dict[str, dict] = {}
    chunks: list[bytes] = []
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(fix.tensors[name])
        if arr.dtype.byteorder not in ("<", "=", "|"):
            arr = arr.astype("<f4")
        raw = arr.tobytes()
        entries[name] = {
            "dtype": "float32",
            "shape": list(arr.shape),
            "offset": offset,
            "length": len(raw),
        }
        chunks.append(raw)
        offset += len(raw)
    manifest = {"version": VERSION, "metadata": fix.metadata, "tensors": entries}
    blob = _canonical_manifest_bytes(manifest)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for raw in chunks:
            fh.write(raw)


def read_container(path) -> FixtureContainer:
    """Parse, bounds-check, and validate a fixture container file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FixtureFormatError("not a fixture container")
    if len(data) < 16:
        raise FixtureCorruptionError("header truncated")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise FixtureVersionError(f"unsupported container version {version}")
    (manifest_len,) = struct.unpack_from("<Q", data, 8)
    if 16 + manifest_len > len(data):
        raise FixtureCorruptionError("manifest extends past end of file")
    try:
        manifest = json.loads(data[16 : 16 + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FixtureCorruptionError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict) or "tensors" not in manifest:
        raise FixtureCorruptionError("manifest lacks a tensor table")
    if manifest.get("version") != VERSION:
        raise FixtureVersionError(
            f"manifest declares unsupported version {manifest.get('version')}"
        )

    payload = data[16 + manifest_len :]
    spans = []
    tensors: dict[str, np.ndarray] = {}
    for name, entry in manifest["tensors"].items():
        try:
            dtype = entry["dtype"]
            shape = tuple(int(x) for x in entry["shape"])
            off = int(entry["offset"])
            length = int(entry["length"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureCorruptionError(f"malformed manifest entry for {name!r}") from exc
        if dtype != "float32":
            raise FixtureValidationError(f"tensor {name!r} must be float32, got {dtype}")
        expected = int(np.prod(shape, dtype=np.int64)) * 4 if shape else 4
        if length != expected:
            raise FixtureCorruptionError(
                f"tensor {name!r} declares {length} bytes for shape {shape}"
            )
        if off < 0 or off + length > len(payload):
            raise FixtureCorruptionError(
                f"tensor {name!r} spans [{off}, {off + length}), payload has "
                f"{len(payload)} bytes"
            )
        spans.append((off, off + length, name))
        arr = np.frombuffer(payload, dtype="<f4", count=length // 4, offset=off)
        tensors[name] = arr.reshape(shape)

    spans.sort()
    for (_, prev_end, prev_name), (start, _, name) in zip(spans, spans[1:]):
        if start < prev_end:
            raise FixtureCorruptionError(
                f"tensors {prev_name!r} and {name!r} overlap in the payload"
            )

    fix = FixtureContainer(tensors=tensors, metadata=manifest.get("metadata", {}))
    validate_container(fix)
    return fix
