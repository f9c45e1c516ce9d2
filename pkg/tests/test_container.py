import json
import struct

import numpy as np
import pytest

from atp import (
    FixtureContainer,
    FixtureCorruptionError,
    FixtureFormatError,
    FixtureValidationError,
    FixtureVersionError,
    read_container,
    write_container,
)
from helpers import container_bytes_equal, rand_attention, rand_fixture


@pytest.fixture
def valid_fixture():
    rng = np.random.default_rng(70)
    tensors = {
        "patch_embeddings": rng.standard_normal((6, 4)).astype(np.float32),
        "attention": rand_attention(rng, 6, 2),
        "text_embedding": np.array([1.0, 0.5, -0.25, 2.0], dtype=np.float32),
    }
    metadata = {
        "n_patches": 6, "d_visual": 4, "d_text": 4, "heads": 2,
        "grid_rows": 2, "grid_cols": 3, "prompt": "a test prompt",
    }
    return FixtureContainer(tensors=tensors, metadata=metadata)


class TestRoundTrip:
    def test_single_roundtrip_is_bitwise(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        back = read_container(path)
        assert container_bytes_equal(valid_fixture, back)

    def test_randomized_roundtrips(self, tmp_path):
        rng = np.random.default_rng(71)
        for i in range(30):
            fix = rand_fixture(rng)
            path = tmp_path / f"f{i}.atpf"
            write_container(fix, path)
            assert container_bytes_equal(fix, read_container(path))

    def test_write_is_deterministic(self, valid_fixture, tmp_path):
        p1, p2 = tmp_path / "a.atpf", tmp_path / "b.atpf"
        write_container(valid_fixture, p1)
        write_container(valid_fixture, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_layout(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        data = path.read_bytes()
        assert data[:4] == b"ATPF"
        assert struct.unpack_from("<I", data, 4)[0] == 1
        (manifest_len,) = struct.unpack_from("<Q", data, 8)
        manifest = json.loads(data[16 : 16 + manifest_len])
        assert manifest["version"] == 1
        assert set(manifest["tensors"]) == set(valid_fixture.tensors)
        # canonical encoding: sorted keys, compact separators
        assert data[16 : 16 + manifest_len] == json.dumps(
            manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=True
        ).encode()

    def test_tensors_read_back_read_only(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        back = read_container(path)
        with pytest.raises(ValueError):
            back.tensors["patch_embeddings"][0, 0] = 1.0


class TestReadErrors:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.atpf"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(FixtureFormatError, match="not a fixture container"):
            read_container(path)

    def test_unsupported_version(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        data = bytearray(path.read_bytes())
        struct.pack_into("<I", data, 4, 2)
        path.write_bytes(bytes(data))
        with pytest.raises(FixtureVersionError, match="version 2"):
            read_container(path)

    def test_truncated_payload(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        data = path.read_bytes()
        path.write_bytes(data[:-1])
        with pytest.raises(FixtureCorruptionError):
            read_container(path)

    def test_manifest_overruns_file(self, tmp_path):
        path = tmp_path / "f.atpf"
        path.write_bytes(b"ATPF" + struct.pack("<I", 1) + struct.pack("<Q", 10**6))
        with pytest.raises(FixtureCorruptionError, match="manifest"):
            read_container(path)

    def test_manifest_not_json(self, tmp_path):
        blob = b"this is not json"
        path = tmp_path / "f.atpf"
        path.write_bytes(
            b"ATPF" + struct.pack("<I", 1) + struct.pack("<Q", len(blob)) + blob
        )
        with pytest.raises(FixtureCorruptionError, match="JSON"):
            read_container(path)

    def test_overlapping_tensors(self, tmp_path):
        manifest = {
            "version": 1,
            "metadata": {"n_patches": 1, "d_visual": 2, "d_text": 2, "heads": 1,
                         "prompt": "", "grid_rows": None, "grid_cols": None},
            "tensors": {
                "patch_embeddings": {"dtype": "float32", "shape": [1, 2], "offset": 0, "length": 8},
                "text_embedding": {"dtype": "float32", "shape": [2], "offset": 4, "length": 8},
                "attention": {"dtype": "float32", "shape": [1, 2, 2], "offset": 12, "length": 16},
            },
        }
        blob = json.dumps(manifest).encode()
        payload = np.array([1, 1, 1, 0.5, 0.5, 0.5, 0.5], dtype="<f4").tobytes()
        path = tmp_path / "f.atpf"
        path.write_bytes(
            b"ATPF" + struct.pack("<I", 1) + struct.pack("<Q", len(blob)) + blob + payload
        )
        with pytest.raises(FixtureCorruptionError, match="overlap"):
            read_container(path)

    def test_length_inconsistent_with_shape(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        data = path.read_bytes()
        (manifest_len,) = struct.unpack_from("<Q", data, 8)
        manifest = json.loads(data[16 : 16 + manifest_len])
        manifest["tensors"]["text_embedding"]["length"] = 12
        blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
        path.write_bytes(data[:8] + struct.pack("<Q", len(blob)) + blob + data[16 + manifest_len:])
        with pytest.raises(FixtureCorruptionError, match="text_embedding"):
            read_container(path)

    def test_attention_row_sums_validated_on_read(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        data = bytearray(path.read_bytes())
        (manifest_len,) = struct.unpack_from("<Q", data, 8)
        manifest = json.loads(data[16 : 16 + manifest_len])
        entry = manifest["tensors"]["attention"]
        offset = 16 + manifest_len + entry["offset"]
        (first,) = struct.unpack_from("<f", data, offset)
        struct.pack_into("<f", data, offset, first + 0.01)
        path.write_bytes(bytes(data))
        with pytest.raises(FixtureValidationError, match="attention"):
            read_container(path)

    def test_missing_file_is_oserror(self, tmp_path):
        with pytest.raises(OSError):
            read_container(tmp_path / "absent.atpf")


class TestValidation:
    def test_missing_required_tensor(self, valid_fixture):
        broken = FixtureContainer(
            tensors={k: v for k, v in valid_fixture.tensors.items() if k != "attention"},
            metadata=valid_fixture.metadata,
        )
        with pytest.raises(FixtureValidationError, match="attention"):
            write_container(broken, "/tmp/unused.atpf")

    def test_wrong_dtype_rejected(self, valid_fixture):
        tensors = dict(valid_fixture.tensors)
        tensors["patch_embeddings"] = tensors["patch_embeddings"].astype(np.float64)
        broken = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        with pytest.raises(FixtureValidationError, match="float32"):
            write_container(broken, "/tmp/unused.atpf")

    def test_non_finite_rejected(self, valid_fixture):
        tensors = dict(valid_fixture.tensors)
        emb = tensors["patch_embeddings"].copy()
        emb[0, 0] = np.inf
        tensors["patch_embeddings"] = emb
        broken = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        with pytest.raises(FixtureValidationError, match="non-finite"):
            write_container(broken, "/tmp/unused.atpf")

    def test_zero_norm_text_rejected(self, valid_fixture):
        tensors = dict(valid_fixture.tensors)
        tensors["text_embedding"] = np.zeros(4, dtype=np.float32)
        broken = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        with pytest.raises(FixtureValidationError, match="zero norm"):
            write_container(broken, "/tmp/unused.atpf")

    def test_metadata_shape_disagreement(self, valid_fixture):
        metadata = dict(valid_fixture.metadata, n_patches=7)
        broken = FixtureContainer(tensors=valid_fixture.tensors, metadata=metadata)
        with pytest.raises(FixtureValidationError, match="patch_embeddings"):
            write_container(broken, "/tmp/unused.atpf")

    def test_grid_product_mismatch(self, valid_fixture):
        metadata = dict(valid_fixture.metadata, grid_rows=4, grid_cols=4)
        broken = FixtureContainer(tensors=valid_fixture.tensors, metadata=metadata)
        with pytest.raises(FixtureValidationError, match="grid"):
            write_container(broken, "/tmp/unused.atpf")

    def test_non_integer_planted_indices(self, valid_fixture):
        tensors = dict(valid_fixture.tensors)
        tensors["planted_indices"] = np.array([0.5, 2.0], dtype=np.float32)
        broken = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        with pytest.raises(FixtureValidationError, match="non-integer"):
            write_container(broken, "/tmp/unused.atpf")

    def test_out_of_range_planted_indices(self, valid_fixture):
        tensors = dict(valid_fixture.tensors)
        tensors["planted_indices"] = np.array([0.0, 6.0], dtype=np.float32)
        broken = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        with pytest.raises(FixtureValidationError, match="planted_indices"):
            write_container(broken, "/tmp/unused.atpf")

    def test_missing_metadata_field(self, valid_fixture):
        metadata = {k: v for k, v in valid_fixture.metadata.items() if k != "prompt"}
        broken = FixtureContainer(tensors=valid_fixture.tensors, metadata=metadata)
        with pytest.raises(FixtureValidationError, match="prompt"):
            write_container(broken, "/tmp/unused.atpf")


class TestAccessors:
    def test_domain_type_construction(self, valid_fixture, tmp_path):
        path = tmp_path / "f.atpf"
        write_container(valid_fixture, path)
        fix = read_container(path)
        patches = fix.patch_token_set()
        assert patches.n_patches == 6
        assert patches.grid_rows == 2 and patches.grid_cols == 3
        assert fix.attention_map().heads == 2
        assert fix.text_embedding().dim == 4
        assert fix.projection() is None
        assert fix.planted_indices() is None

    def test_planted_indices_come_back_as_ints(self, valid_fixture, tmp_path):
        tensors = dict(valid_fixture.tensors)
        tensors["planted_indices"] = np.array([1.0, 4.0], dtype=np.float32)
        fix = FixtureContainer(tensors=tensors, metadata=valid_fixture.metadata)
        path = tmp_path / "f.atpf"
        write_container(fix, path)
        back = read_container(path)
        planted = back.planted_indices()
        assert planted.dtype == np.int64
        assert planted.tolist() == [1, 4]
