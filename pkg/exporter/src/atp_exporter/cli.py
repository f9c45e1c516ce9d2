"""Command line for the fixture exporter.

    atp-export export --model ID --image photo.jpg --prompt "..." --out f.atpf
    atp-export synthetic-check --seed 42 --out conformance.atpf

``export`` runs a matched pretrained ViT/CLIP pair on one image/prompt and
writes an ATPF fixture. ``synthetic-check`` writes the deterministic
conformance fixture that must match the consuming engine's generator byte
for byte.
"""

from __future__ import annotations

import argparse
import sys

from .conformance import export_synthetic_check


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atp-export")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export ViT/CLIP activations for one image/prompt")
    p.add_argument("--model", required=True, help="pretrained vision/text pairing id")
    p.add_argument("--image", required=True, help="input image path")
    p.add_argument("--prompt", required=True, help="text prompt")
    p.add_argument("--out", required=True, help="output fixture path")
    p.add_argument("--device", default="cpu")

    p = sub.add_parser("synthetic-check", help="write the format-conformance fixture")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output fixture path")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synthetic-check":
            export_synthetic_check(args.seed, args.out)
        else:
            from .extract import ExportRequest, export_fixture

            export_fixture(ExportRequest(
                model_id=args.model, image_path=args.image,
                prompt=args.prompt, out_path=args.out, device=args.device,
            ))
    except Exception as exc:  # surface one diagnostic line, fail nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
