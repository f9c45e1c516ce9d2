"""Command-line surface over fixture files.

Subcommands: prune (JSON result), sweep (CSV over alpha x keep-ratio grids),
cost (stdout JSON cost report), stability (JSON noise probe), viz (P6 PPM
patch map, kept = blue, removed = gray).

Outputs are byte-deterministic: floats are serialized with 9 significant
digits, nothing embeds timestamps or locale-dependent text. Exit codes:
0 success, 1 validation or argument error, 2 I/O error. Set ATP_LOG to a
level name (debug, info, ...) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .container import FixtureContainer, FixtureError, read_container
from .costmodel import LMShape, relative_report
from .pruner import PruneConfig, PruneResult, atp_pipeline, kept_set_stability

log = logging.getLogger("atp")

KEPT_COLOR = (0, 0, 255)
REMOVED_COLOR = (128, 128, 128)
DEFAULT_CELL_SIZE = 16


class UsageError(Exception):
    """Bad command-line arguments; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _nine(x: float) -> float:
    """Round to 9 significant digits for stable serialization."""
    return float(f"{x:.9g}")


def _nine_list(values) -> list[float]:
    return [_nine(float(v)) for v in values]


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)
    log.info("wrote %s (%d bytes)", path, len(data))


def _write_json(path: str, payload: dict) -> None:
    _write_bytes(path, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))


def _config_dict(cfg: PruneConfig) -> dict:
    keep: dict = {}
    if cfg.keep_k is not None:
        keep["keep_k"] = cfg.keep_k
    else:
        keep["keep_ratio"] = _nine(cfg.keep_ratio)
    return {
        "alpha": _nine(cfg.alpha),
        **keep,
        "intra_mode": cfg.intra_mode,
        "seed": cfg.seed,
    }


def _result_dict(result: PruneResult) -> dict:
    return {
        "n_patches": result.n_patches,
        "k": result.k,
        "kept_indices": [int(i) for i in result.kept_indices],
        "mask": [bool(m) for m in result.mask],
        "scores": {
            "inter_raw": _nine_list(result.inter_raw),
            "intra_raw": _nine_list(result.intra_raw),
            "inter_norm": _nine_list(result.inter_norm),
            "intra_norm": _nine_list(result.intra_norm),
            "fused": _nine_list(result.fused),
        },
        "config": _config_dict(result.config),
    }


def _comma_floats(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise UsageError("expected at least one value")
    return values


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.5, help="fusion weight in [0, 1]")
    keep = p.add_mutually_exclusive_group()
    keep.add_argument("--keep-ratio", type=float, default=None, help="fraction kept, in (0, 1]")
    keep.add_argument("--keep-k", type=int, default=None, help="absolute kept count")
    p.add_argument(
        "--intra-mode", choices=["cls_row", "row_sum"], default="cls_row",
        help="intra-modal saliency mode",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for the stability probe")


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--layers", type=int, default=32, help="transformer layer count")
    p.add_argument("--hidden", type=int, default=4096, help="hidden width d")
    p.add_argument("--kv-bytes", type=int, default=2, help="bytes per cached kv element")
    p.add_argument("--text-len", type=int, default=0, help="text token count in the prefix")
    p.add_argument(
        "--decode-fraction", type=float, default=0.15,
        help="latency share of decode, untouched by pruning",
    )


def _config_from_args(args) -> PruneConfig:
    return PruneConfig(
        alpha=args.alpha,
        keep_ratio=args.keep_ratio,
        keep_k=args.keep_k,
        intra_mode=args.intra_mode,
        seed=args.seed,
    )


def _load_fixture(path: str) -> FixtureContainer:
    fix = read_container(path)
    log.info(
        "loaded fixture %s: %d patches, %d heads",
        path, fix.metadata["n_patches"], fix.metadata["heads"],
    )
    return fix


def _cmd_prune(args) -> int:
    fix = _load_fixture(args.fixture)
    result = atp_pipeline(
        fix.patch_token_set(), fix.attention_map(), fix.text_embedding(),
        fix.projection(), _config_from_args(args),
    )
    _write_json(args.out, _result_dict(result))
    return 0


def _cmd_sweep(args) -> int:
    fix = _load_fixture(args.fixture)
    patches = fix.patch_token_set()
    attn = fix.attention_map()
    text = fix.text_embedding()
    proj = fix.projection()
    planted = fix.planted_indices()
    if planted is not None and planted.size == 0:
        planted = None
    shape = LMShape(layers=args.layers, hidden=args.hidden, kv_bytes_per_element=args.kv_bytes)

    header = "alpha,keep_ratio,K,rel_flops_visual,rel_flops_full,rel_kv,speedup"
    if planted is not None:
        header += ",planted_recall"
    lines = [header]
    planted_set = set(planted.tolist()) if planted is not None else None
    for alpha in args.alphas:
        for ratio in args.keep_ratios:
            cfg = PruneConfig(alpha=alpha, keep_ratio=ratio,
                              intra_mode=args.intra_mode, seed=args.seed)
            result = atp_pipeline(patches, attn, text, proj, cfg)
            report = relative_report(
                patches.n_patches, result.k, args.text_len, shape, args.decode_fraction
            )
            cells = [
                f"{alpha:.9g}",
                f"{ratio:.9g}",
                str(result.k),
                f"{report.rel_flops_visual_only:.9g}",
                f"{report.rel_flops_full_seq:.9g}",
                f"{report.rel_kv:.9g}",
                f"{report.modeled_speedup:.9g}",
            ]
            if planted_set is not None:
                hits = sum(1 for i in result.kept_indices if int(i) in planted_set)
                cells.append(f"{hits / len(planted_set):.9g}")
            lines.append(",".join(cells))
    _write_bytes(args.out, ("\n".join(lines) + "\n").encode("utf-8"))
    return 0


def _cmd_cost(args) -> int:
    shape = LMShape(layers=args.layers, hidden=args.hidden, kv_bytes_per_element=args.kv_bytes)
    report = relative_report(args.n, args.k, args.text_len, shape, args.decode_fraction)
    payload = {
        key: (_nine(value) if isinstance(value, float) else value)
        for key, value in report.to_dict().items()
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_stability(args) -> int:
    fix = _load_fixture(args.fixture)
    summary = kept_set_stability(
        fix.patch_token_set(), fix.attention_map(), fix.text_embedding(),
        fix.projection(), _config_from_args(args),
        sigma=args.sigma, trials=args.trials,
    )
    _write_json(args.out, {
        "sigma": _nine(summary.sigma),
        "trials": summary.trials,
        "mean_jaccard": _nine(summary.mean_jaccard),
        "min_jaccard": _nine(summary.min_jaccard),
        "max_jaccard": _nine(summary.max_jaccard),
        "per_trial": _nine_list(summary.per_trial),
        "config": _config_dict(_config_from_args(args)),
    })
    return 0


def _cmd_viz(args) -> int:
    fix = _load_fixture(args.fixture)
    patches = fix.patch_token_set()
    if not patches.has_grid:
        raise ValueError("fixture lacks rectangular grid metadata; cannot rasterize")
    result = atp_pipeline(
        patches, fix.attention_map(), fix.text_embedding(),
        fix.projection(), _config_from_args(args),
    )
    rows, cols, cell = patches.grid_rows, patches.grid_cols, args.cell_size
    if cell < 1:
        raise UsageError(f"--cell-size must be >= 1, got {cell}")
    image = np.empty((rows * cell, cols * cell, 3), dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            color = KEPT_COLOR if result.mask[r * cols + c] else REMOVED_COLOR
            image[r * cell : (r + 1) * cell, c * cell : (c + 1) * cell] = color
    header = f"P6\n{cols * cell} {rows * cell}\n255\n".encode("ascii")
    _write_bytes(args.out, header + image.tobytes())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atp", description="Visual token pruning over fixture files")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="prune one fixture, write the full result as JSON")
    p.add_argument("--fixture", required=True, help="input fixture container")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("sweep", help="alpha x keep-ratio grid sweep, CSV report")
    p.add_argument("--fixture", required=True)
    p.add_argument("--alpha", dest="alphas", type=_comma_floats, default=[0.5],
                   help="comma-separated fusion weights")
    p.add_argument("--keep-ratio", dest="keep_ratios", type=_comma_floats,
                   default=[0.25, 0.5, 0.75, 1.0], help="comma-separated keep ratios")
    p.add_argument("--intra-mode", choices=["cls_row", "row_sum"], default="cls_row")
    p.add_argument("--seed", type=int, default=0)
    _add_shape_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("cost", help="print a prefill cost report as JSON")
    p.add_argument("n", type=int, help="full visual token count N")
    p.add_argument("k", type=int, help="kept visual token count K")
    _add_shape_flags(p)
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("stability", help="kept-set stability under embedding noise")
    p.add_argument("--fixture", required=True)
    _add_config_flags(p)
    p.add_argument("--sigma", type=float, default=0.05, help="noise standard deviation")
    p.add_argument("--trials", type=int, default=20, help="number of noisy reruns")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("viz", help="render kept/removed patches as a P6 PPM image")
    p.add_argument("--fixture", required=True)
    _add_config_flags(p)
    p.add_argument("--cell-size", type=int, default=DEFAULT_CELL_SIZE,
                   help="square pixels per patch")
    p.add_argument("--out", required=True, help="output PPM path")
    p.set_defaults(func=_cmd_viz)

    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("ATP_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
