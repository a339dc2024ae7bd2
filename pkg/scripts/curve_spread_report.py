"""Measure how widely exposure-adjustment curves vary across a synthesized set.

Darkens a batch of demo images with per-image random parameters, estimates
the tone curve that would map each dark image back to its source, and
reports the spread of curve severities. A wide spread indicates the
synthesis covers many distinct under-exposure levels rather than one
fixed look.
"""

import argparse
import os
import tempfile

import numpy as np

from lowlight_forge.curves import dataset_curve_report
from lowlight_forge.image import load_image
from lowlight_forge.simulation import darken, sample_params
from lowlight_forge.synthetic import demo_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=30)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--report", default=None, help="json output path")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    with tempfile.TemporaryDirectory() as tmp:
        paths = demo_corpus(os.path.join(tmp, "corpus"), count=args.count, size=args.size)
        pairs = []
        names = []
        for path in paths:
            bright = load_image(path)
            pairs.append((darken(bright, sample_params(rng)), bright))
            names.append(os.path.basename(path))
        report = dataset_curve_report(pairs, out=args.report, names=names)

    severities = sorted(c["severity"] for c in report["curves"])
    n = len(severities)
    print(f"curves: {n}, degenerate: {sum(c['degenerate'] for c in report['curves'])}")
    print(f"severity min/median/max: {severities[0]:.2f} / "
          f"{severities[n // 2]:.2f} / {severities[-1]:.2f}")
    print("severity histogram (16 bins):")
    hist = report["severity_histogram"]
    top = max(hist["counts"]) or 1
    for lo, hi, count in zip(hist["bin_edges"][:-1], hist["bin_edges"][1:], hist["counts"]):
        bar = "#" * round(40 * count / top)
        print(f"  [{lo:7.2f}, {hi:7.2f}) {count:3d} {bar}")
    if args.report:
        print(f"wrote {args.report}")


if __name__ == "__main__":
    main()
