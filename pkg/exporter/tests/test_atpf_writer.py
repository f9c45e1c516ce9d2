import numpy as np
import pytest

import atp
from atp_exporter import ExportShapeError, write_atpf


def valid_parts():
    rng = np.random.default_rng(5)
    n, d = 4, 6
    attn = rng.random((2, n + 1, n + 1)) + 1e-3
    attn /= attn.sum(axis=2, keepdims=True)
    tensors = {
        "patch_embeddings": rng.standard_normal((n, d)).astype(np.float32),
        "attention": attn.astype(np.float32),
        "text_embedding": (rng.standard_normal(d) + 0.1).astype(np.float32),
    }
    metadata = {
        "n_patches": n, "d_visual": d, "d_text": d, "heads": 2,
        "grid_rows": 2, "grid_cols": 2, "prompt": "writer test",
    }
    return tensors, metadata


def test_written_file_passes_engine_reader(tmp_path):
    tensors, metadata = valid_parts()
    path = tmp_path / "w.atpf"
    write_atpf(path, tensors, metadata)
    fix = atp.read_container(path)
    for name, arr in tensors.items():
        assert fix.tensors[name].tobytes() == arr.tobytes()
    assert fix.metadata == metadata


def test_refuses_shape_mismatch(tmp_path):
    tensors, metadata = valid_parts()
    metadata["n_patches"] = 5
    path = tmp_path / "w.atpf"
    with pytest.raises(ExportShapeError, match="patch_embeddings"):
        write_atpf(path, tensors, metadata)
    assert not path.exists()


def test_refuses_unnormalized_attention(tmp_path):
    tensors, metadata = valid_parts()
    attn = tensors["attention"].copy()
    attn[0, 1, 1] += 0.01
    tensors["attention"] = attn
    with pytest.raises(ExportShapeError, match="attention rows"):
        write_atpf(tmp_path / "w.atpf", tensors, metadata)


def test_refuses_non_float32(tmp_path):
    tensors, metadata = valid_parts()
    tensors["text_embedding"] = tensors["text_embedding"].astype(np.float64)
    with pytest.raises(ExportShapeError, match="float32"):
        write_atpf(tmp_path / "w.atpf", tensors, metadata)


def test_refuses_missing_required_tensor(tmp_path):
    tensors, metadata = valid_parts()
    del tensors["text_embedding"]
    with pytest.raises(ExportShapeError, match="text_embedding"):
        write_atpf(tmp_path / "w.atpf", tensors, metadata)


def test_refuses_non_finite(tmp_path):
    tensors, metadata = valid_parts()
    emb = tensors["patch_embeddings"].copy()
    emb[0, 0] = np.nan
    tensors["patch_embeddings"] = emb
    with pytest.raises(ExportShapeError, match="non-finite"):
        write_atpf(tmp_path / "w.atpf", tensors, metadata)
