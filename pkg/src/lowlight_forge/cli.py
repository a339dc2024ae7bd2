"""Command line front end.

Each subcommand is a thin adapter over the library API: parse arguments,
load images, call the corresponding function, write outputs. No numeric
logic lives here.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path, PurePosixPath

import numpy as np

from .curves import dataset_curve_report
from .errors import ConfigurationError, LowlightForgeError
from .fusion import FusionConfig, amplify_contrast
from .image import load_image, save_image
from .metrics import quality_report
from .pipeline import (
    PipelineConfig,
    build_dataset,
    load_manifest,
    resolve_workers,
    split_dataset,
    verify_dataset,
)
from .selection import SelectionConfig, select
from .simulation import (
    NoiseParams,
    NoiseSampling,
    SimulationParams,
    darken,
    sample_noise_params,
    sample_params,
    synthesize_noise,
)
from .supervision import load_map, noise_map, save_map, ue_attention_map

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}

_SELECTION_FLAGS = (
    ("segment_size", "--segment-size", int, "region grid spacing"),
    ("dark_fraction_thresh", "--dark-fraction", float, "required fraction of bright regions"),
    ("blur_thresh", "--blur-thresh", float, "Laplacian variance floor"),
    ("color_thresh", "--color-thresh", float, "colorfulness floor"),
)


def _iter_images(directory) -> list[str]:
    root = Path(directory)
    if not root.is_dir():
        raise ConfigurationError(f"not a directory: {directory}")
    rels = [
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    ]
    return sorted(rels)


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _add_selection_flags(sub) -> None:
    for _, flag, kind, help_text in _SELECTION_FLAGS:
        sub.add_argument(flag, type=kind, default=None, help=help_text)


def _selection_overrides(args) -> dict:
    overrides = {}
    for field_name, flag, _, _ in _SELECTION_FLAGS:
        value = getattr(args, flag.lstrip("-").replace("-", "_"), None)
        if value is not None:
            overrides[field_name] = value
    return overrides


def _cmd_select(args) -> int:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    config = SelectionConfig(**{**base, **_selection_overrides(args)})
    reports = []
    for rel in _iter_images(args.input_dir):
        report = select(load_image(os.path.join(args.input_dir, rel)), config)
        reports.append({"file": rel, **asdict(report)})
        print(
            f"{rel} selected={report.selected} "
            f"bright_fraction={report.bright_fraction:.4f} "
            f"blur_variance={report.blur_variance:.2f} "
            f"colorfulness={report.colorfulness:.2f}"
        )
    if args.report:
        _write_json(args.report, reports)
    return 0


def _cmd_synthesize(args) -> int:
    image = load_image(args.input)
    rng = np.random.default_rng(args.seed)
    explicit = [args.alpha, args.beta, args.gamma]
    if any(v is not None for v in explicit) and any(v is None for v in explicit):
        raise ConfigurationError("--alpha, --beta and --gamma must be given together")
    if args.alpha is not None:
        sim = SimulationParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    else:
        sim = sample_params(rng)
    if args.sigma_p is not None or args.sigma_g is not None:
        noise = NoiseParams(
            sigma_p=args.sigma_p or 0.0,
            sigma_g=args.sigma_g or 0.0,
            crf=args.crf,
            bayer_pattern=args.bayer,
            seed=int(rng.integers(0, 2**63)),
        )
    else:
        sampling = NoiseSampling(crf=args.crf, bayer_pattern=args.bayer)
        noise = sample_noise_params(rng, sampling)
    dark = darken(image, sim)
    noisy = synthesize_noise(dark, noise)
    save_image(args.dark, dark, 8)
    save_image(args.noisy, noisy, 8)
    params = {"sim": asdict(sim), "noise": asdict(noise), "seed": args.seed}
    if args.params_out:
        _write_json(args.params_out, params)
    print(
        f"alpha={sim.alpha:.4f} beta={sim.beta:.4f} gamma={sim.gamma:.4f} "
        f"sigma_p={noise.sigma_p:.5f} sigma_g={noise.sigma_g:.5f} seed={noise.seed}"
    )
    return 0


def _cmd_maps(args) -> int:
    bright = load_image(args.bright)
    dark = load_image(args.dark)
    if args.attention:
        save_map(args.attention, ue_attention_map(bright, dark))
        print(f"wrote {args.attention}")
    if args.noise:
        if not args.noisy:
            raise ConfigurationError("--noise requires --noisy")
        save_map(args.noise, noise_map(load_image(args.noisy), dark))
        print(f"wrote {args.noise}")
    if not args.attention and not args.noise:
        raise ConfigurationError("nothing to do: pass --attention and/or --noise")
    return 0


def _cmd_fuse(args) -> int:
    config = FusionConfig(
        stack_size=args.stack_size,
        detail_lambda=args.detail_lambda,
        detail_boost=args.detail_boost,
        pyramid_levels=args.levels,
    )
    fused = amplify_contrast(load_image(args.input), config)
    save_image(args.output, fused, 8)
    print(f"wrote {args.output}")
    return 0


def _format_cell(value) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def _cmd_metrics(args) -> int:
    rels = [r for r in _iter_images(args.pred_dir)
            if os.path.exists(os.path.join(args.ref_dir, r))]
    rows = []
    for rel in rels:
        pred = load_image(os.path.join(args.pred_dir, rel))
        ref = load_image(os.path.join(args.ref_dir, rel))
        attention = None
        if args.attention_dir:
            att_path = os.path.join(
                args.attention_dir, str(PurePosixPath(rel).with_suffix(".png"))
            )
            if os.path.exists(att_path):
                attention = load_map(att_path)
        report = quality_report(pred, ref, attention=attention)
        rows.append([
            rel,
            _format_cell(report.psnr),
            _format_cell(report.ssim),
            _format_cell(report.brightness_delta),
            _format_cell(report.loe),
            _format_cell(report.bright_loss),
            _format_cell(report.structural_loss),
            _format_cell(report.regional_loss),
            _format_cell(report.composite),
        ])
    header = ["file", "psnr", "ssim", "ab", "loe",
              "bright_loss", "structural_loss", "regional_loss", "composite"]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    if args.out:
        print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_curves(args) -> int:
    rels = [r for r in _iter_images(args.low_dir)
            if os.path.exists(os.path.join(args.ref_dir, r))]
    pairs = [
        (load_image(os.path.join(args.low_dir, r)), load_image(os.path.join(args.ref_dir, r)))
        for r in rels
    ]
    report = dataset_curve_report(pairs, out=args.report, names=rels)
    degenerate = sum(1 for c in report["curves"] if c["degenerate"])
    severities = [c["severity"] for c in report["curves"]]
    lo = min(severities) if severities else 0.0
    hi = max(severities) if severities else 0.0
    print(f"curves={report['count']} degenerate={degenerate} "
          f"severity=[{lo:.3f}, {hi:.3f}]")
    if args.report:
        print(f"wrote {args.report}")
    return 0


def _cmd_build(args) -> int:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    if args.input_dir is not None:
        base["input_dir"] = args.input_dir
    if args.output_dir is not None:
        base["output_dir"] = args.output_dir
    if args.seed is not None:
        base["master_seed"] = args.seed
    if args.workers is not None:
        base["workers"] = args.workers
    if args.no_maps:
        base["emit_maps"] = False
    if args.no_high_contrast:
        base["emit_high_contrast"] = False
    selection_overrides = _selection_overrides(args)
    if selection_overrides:
        base["selection"] = {**base.get("selection", {}), **selection_overrides}
    if "input_dir" not in base or "output_dir" not in base:
        raise ConfigurationError(
            "input and output directories are required (via --config or flags)"
        )
    config = PipelineConfig.from_dict(base)
    workers = resolve_workers(config.workers)
    if workers != config.workers:
        config = PipelineConfig.from_dict({**config.to_dict(), "workers": workers})
    manifest = build_dataset(config)
    summary = manifest["summary"]
    print(
        f"built {summary['total']} records: {summary['selected']} selected, "
        f"{summary['rejected']} rejected, {summary['errors']} errors "
        f"-> {os.path.join(config.output_dir, 'manifest.json')}"
    )
    return 0


def _cmd_verify(args) -> int:
    violations = verify_dataset(args.manifest)
    if violations:
        for v in violations:
            print(v)
        print(f"FAILED: {len(violations)} violation(s)")
        return 1
    manifest = load_manifest(args.manifest)
    print(f"OK ({len(manifest['records'])} records)")
    return 0


def _cmd_split(args) -> int:
    manifest = load_manifest(args.manifest)
    train, test = split_dataset(manifest, test_fraction=args.test_fraction, seed=args.seed)
    prefix = args.out_prefix or os.path.splitext(args.manifest)[0]
    for side, name in ((train, "train"), (test, "test")):
        path = f"{prefix}.{name}.json"
        _write_json(path, side)
        print(f"wrote {path} ({len(side['records'])} records)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowlight-forge",
        description="Synthesize paired low-light training data with supervision maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="screen candidate images for suitability")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--config", default=None, help="selection config json")
    p.add_argument("--report", default=None, help="write reports to this json file")
    _add_selection_flags(p)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("synthesize", help="darken one image and add sensor noise")
    p.add_argument("--input", required=True)
    p.add_argument("--dark", required=True, help="output path for the darkened image")
    p.add_argument("--noisy", required=True, help="output path for the noisy image")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params-out", default=None, help="record parameters to this json file")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--sigma-p", type=float, default=None, help="Poisson noise scale")
    p.add_argument("--sigma-g", type=float, default=None, help="Gaussian noise sigma")
    p.add_argument("--crf", default="srgb")
    p.add_argument("--bayer", default="RGGB")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("maps", help="compute supervision maps as 16-bit grayscale png")
    p.add_argument("--bright", required=True)
    p.add_argument("--dark", required=True)
    p.add_argument("--noisy", default=None)
    p.add_argument("--attention", default=None, help="attention map output path")
    p.add_argument("--noise", default=None, help="noise map output path")
    p.set_defaults(func=_cmd_maps)

    p = sub.add_parser("fuse", help="produce a contrast amplified reference image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--stack-size", type=int, default=10)
    p.add_argument("--detail-lambda", type=float, default=0.02)
    p.add_argument("--detail-boost", type=float, default=1.5)
    p.add_argument("--levels", type=int, default=None)
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("metrics", help="score enhanced images against references")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--ref-dir", required=True)
    p.add_argument("--attention-dir", default=None)
    p.add_argument("--out", default=None, help="csv output path (default stdout)")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("curves", help="estimate tone curves over paired directories")
    p.add_argument("--low-dir", required=True)
    p.add_argument("--ref-dir", required=True)
    p.add_argument("--report", default=None, help="json report path")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("build", help="run the full dataset pipeline")
    p.add_argument("--config", default=None, help="pipeline config json; flags override")
    p.add_argument("--input-dir", default=None)
    p.add_argument("--output-dir", default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-maps", action="store_true")
    p.add_argument("--no-high-contrast", action="store_true")
    _add_selection_flags(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("verify", help="audit a built dataset against its manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("split", help="partition a manifest into train and test")
    p.add_argument("--manifest", required=True)
    p.add_argument("--test-fraction", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", default=None)
    p.set_defaults(func=_cmd_split)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LowlightForgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
