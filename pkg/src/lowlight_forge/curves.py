"""Tone curves between low-light frames and their references.

A curve is a 256-entry monotone lookup table estimated by matching the
value-plane histogram of the low frame onto the reference. Curves can be
applied back to images (rescaling RGB around the value plane), scored for
severity, and aggregated into a dataset-level report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .image import clamp01, require_image, value_plane

LUT_SIZE = 256
_V_GUARD = 1e-8


@dataclass(frozen=True)
class ToneCurve:
    lut: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        lut = np.asarray(self.lut, dtype=np.float64)
        if lut.shape != (LUT_SIZE,):
            raise ContractError(f"lut must hold {LUT_SIZE} values, got shape {lut.shape}")
        if not np.isfinite(lut).all() or lut.min() < 0.0 or lut.max() > 1.0:
            raise DomainError("lut values must be finite and lie in [0, 1]")
        if np.any(np.diff(lut) < 0.0):
            raise DomainError("lut must be non-decreasing")
        object.__setattr__(self, "lut", lut)


def _level_counts(img: np.ndarray) -> np.ndarray:
    levels = np.rint(value_plane(img) * (LUT_SIZE - 1)).astype(np.int64)
    return np.bincount(levels.ravel(), minlength=LUT_SIZE)


def estimate_curve(low: np.ndarray, ref: np.ndarray) -> ToneCurve:
    """Histogram-matching curve from the low frame's value plane to the
    reference's: lut[k] = G_inv(F(k/255)) with the left-continuous
    generalized inverse of the reference CDF.

    A constant low frame cannot anchor a full histogram match; the curve then
    interpolates through its single level mapped to G_inv(1) and is flagged
    degenerate.
    """
    counts_low = _level_counts(require_image(low))
    counts_ref = _level_counts(require_image(ref))
    f_cdf = np.cumsum(counts_low) / counts_low.sum()
    g_cdf = np.cumsum(counts_ref) / counts_ref.sum()

    occupied = np.nonzero(counts_low)[0]
    if len(occupied) == 1:
        level = int(occupied[0])
        top = int(np.searchsorted(g_cdf, 1.0, side="left")) / (LUT_SIZE - 1)
        anchor_map = {0: 0.0, LUT_SIZE - 1: 1.0}
        anchor_map[level] = top
        anchors_x = sorted(anchor_map)
        anchors_y = [anchor_map[x] for x in anchors_x]
        lut = np.interp(np.arange(LUT_SIZE), anchors_x, anchors_y)
        return ToneCurve(lut=lut, degenerate=True)

    indices = np.searchsorted(g_cdf, f_cdf, side="left")
    lut = indices.astype(np.float64) / (LUT_SIZE - 1)
    return ToneCurve(lut=lut, degenerate=False)


def apply_curve(image: np.ndarray, curve: ToneCurve) -> np.ndarray:
    """Remap the value plane through the curve and rescale RGB to match.

    Channels scale by V'/V with a guard at V = 0 (a pure black pixel stays
    black). Gray pixels stay gray.
    """
    img = require_image(image)
    v = value_plane(img)
    v_mapped = np.interp(v * (LUT_SIZE - 1), np.arange(LUT_SIZE), curve.lut)
    ratio = v_mapped / np.maximum(v, _V_GUARD)
    return clamp01(img * ratio[:, :, None])


def curve_severity(curve: ToneCurve) -> float:
    """Maximum slope of the piecewise-linear curve over the lower half of its
    domain. The identity curve scores exactly 1."""
    slopes = np.diff(curve.lut) * (LUT_SIZE - 1)
    lower = slopes[: (LUT_SIZE - 1) // 2]
    return float(lower.max())


def dataset_curve_report(pairs, out=None, names=None) -> dict:
    """Estimate a curve per (low, ref) pair and aggregate.

    The report holds every curve, decile envelope curves across the set, and
    a severity histogram. Written as JSON when out is given.
    """
    pairs = list(pairs)
    if not pairs:
        raise ContractError("dataset_curve_report needs at least one pair")
    if names is None:
        names = [f"pair_{i:04d}" for i in range(len(pairs))]
    if len(names) != len(pairs):
        raise ContractError(f"{len(names)} names for {len(pairs)} pairs")
    curves = [estimate_curve(low, ref) for low, ref in pairs]
    luts = np.stack([c.lut for c in curves])
    severities = np.array([curve_severity(c) for c in curves])
    envelopes = {
        f"p{q}": np.percentile(luts, q, axis=0).tolist() for q in range(0, 101, 10)
    }
    hist_range = (0.0, max(1.0, float(severities.max())))
    hist, edges = np.histogram(severities, bins=16, range=hist_range)
    report = {
        "count": len(curves),
        "curves": [
            {
                "name": name,
                "degenerate": c.degenerate,
                "severity": float(s),
                "lut": c.lut.tolist(),
            }
            for name, c, s in zip(names, curves, severities)
        ],
        "envelopes": envelopes,
        "severity_histogram": {
            "bin_edges": edges.tolist(),
            "counts": hist.tolist(),
        },
    }
    if out is not None:
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report
