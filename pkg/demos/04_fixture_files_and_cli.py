#!/usr/bin/env python3
"""Fixture files and the command-line surface.

Writes a synthetic ATPF container to disk, inspects its byte layout, then
drives the same pruning workflow through the CLI: a JSON prune result, a
sweep CSV, and a patch-map image (kept = blue, removed = gray).
"""

import json
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

from atp import SyntheticSpec, gen_synthetic, read_container, write_container

workdir = Path(tempfile.mkdtemp(prefix="atp-demo-"))
fixture_path = workdir / "scene.atpf"

spec = SyntheticSpec(
    grid_rows=10, grid_cols=10, dim=16, heads=2,
    planted_row=3, planted_col=4, planted_height=3, planted_width=3,
    signal_strength=0.9, seed=99,
)
write_container(gen_synthetic(spec), fixture_path)

raw = fixture_path.read_bytes()
magic = raw[:4].decode()
version = struct.unpack_from("<I", raw, 4)[0]
manifest_len = struct.unpack_from("<Q", raw, 8)[0]
manifest = json.loads(raw[16 : 16 + manifest_len])
print(f"wrote {fixture_path} ({len(raw)} bytes)")
print(f"magic={magic!r} version={version} manifest={manifest_len} B")
print("tensors in the manifest:")
for name, entry in manifest["tensors"].items():
    print(f"  {name:<18} {str(entry['shape']):<14} at payload offset {entry['offset']}")

fix = read_container(fixture_path)
print(f"\nread back and validated: {fix.metadata['n_patches']} patches, "
      f"prompt={fix.metadata['prompt']!r}, planted={fix.planted_indices().tolist()}")


def cli(*args: str) -> None:
    cmd = [sys.executable, "-m", "atp.cli", *args]
    print(f"\n$ atp {' '.join(args)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"CLI failed ({proc.returncode}): {proc.stderr}")
    if proc.stdout:
        print(proc.stdout.rstrip())


cli("prune", "--fixture", str(fixture_path), "--keep-k", "9",
    "--out", str(workdir / "result.json"))
result = json.loads((workdir / "result.json").read_text())
print(f"kept indices: {result['kept_indices']}")

cli("sweep", "--fixture", str(fixture_path), "--alpha", "0.5",
    "--keep-ratio", "0.3,0.6,0.9", "--out", str(workdir / "sweep.csv"))
print((workdir / "sweep.csv").read_text().rstrip())

cli("cost", "256", "154")

cli("viz", "--fixture", str(fixture_path), "--keep-k", "9",
    "--cell-size", "8", "--out", str(workdir / "map.ppm"))
print(f"patch map written to {workdir / 'map.ppm'} "
      f"(P6 PPM, {10 * 8}x{10 * 8}; view with any image tool)")
