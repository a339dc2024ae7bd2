"""Quality metrics and training-loss components for enhanced images.

Fidelity metrics (psnr, ssim, brightness delta, lightness-order error) and
the loss terms used to judge synthetic pairs (asymmetric brightness loss,
structural loss, attention-masked regional loss, and their weighted
composite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractError
from .image import luma_plane, require_image, require_plane, value_plane


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ContractError(f"window must be a positive odd size, got {self.window}")
        if self.sigma <= 0:
            raise ContractError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class LossWeights:
    w_eb: float = 1.0
    w_es: float = 1.0
    w_ep: float = 0.35  # reserved for a perceptual term; not computed here
    w_er: float = 5.0
    lam: float = 10.0


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    brightness_delta: float
    loe: float
    bright_loss: float
    structural_loss: float
    regional_loss: float | None
    composite: float | None


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = require_image(a)
    y = require_image(b)
    if x.shape != y.shape:
        raise ContractError(f"image shapes differ: {x.shape} vs {y.shape}")
    return x, y


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(1 / MSE) over all samples; +inf for identical images."""
    x, y = _pair(a, b)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_taps(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    offsets = np.arange(window) - half
    taps = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _windowed_mean(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Gaussian-weighted local mean, cropped to fully interior windows."""
    half = len(taps) // 2
    out = ndimage.correlate1d(plane, taps, axis=0, mode="constant")
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half] if half else out


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity of the luma planes.

    Local statistics use a Gaussian window (11x11, sigma 1.5 by default) and
    only fully interior window positions contribute. Stabilizers are
    C1 = k1**2 and C2 = k2**2 on the unit dynamic range.
    """
    x, y = _pair(a, b)
    if min(x.shape[:2]) < params.window:
        raise ContractError(
            f"images must be at least {params.window} pixels on each side, got {x.shape[:2]}"
        )
    lx = luma_plane(x)
    ly = luma_plane(y)
    taps = _gaussian_taps(params.window, params.sigma)
    mu1 = _windowed_mean(lx, taps)
    mu2 = _windowed_mean(ly, taps)
    s11 = _windowed_mean(lx * lx, taps) - mu1 * mu1
    s22 = _windowed_mean(ly * ly, taps) - mu2 * mu2
    s12 = _windowed_mean(lx * ly, taps) - mu1 * mu2
    c1 = params.k1 * params.k1
    c2 = params.k2 * params.k2
    score = ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    )
    return float(score.mean())


def average_brightness_delta(a: np.ndarray, b: np.ndarray) -> float:
    """255 * (mean luma of a - mean luma of b)."""
    x, y = _pair(a, b)
    return float(255.0 * (luma_plane(x).mean() - luma_plane(y).mean()))


def loe(enhanced: np.ndarray, original: np.ndarray, grid: int = 50) -> float:
    """Lightness-order error: the fraction of sampled pixel pairs whose
    value-plane ordering flips between the two images, times 1000.

    Symmetric in its arguments. Sampling takes up to grid evenly spaced
    rows and columns.
    """
    x, y = _pair(enhanced, original)
    if grid < 1:
        raise ContractError(f"grid must be >= 1, got {grid}")
    ve = value_plane(x)
    vo = value_plane(y)
    h, w = vo.shape
    rows = np.floor(np.linspace(0, h - 1, min(grid, h))).astype(int)
    cols = np.floor(np.linspace(0, w - 1, min(grid, w))).astype(int)
    so = vo[np.ix_(rows, cols)].ravel()
    se = ve[np.ix_(rows, cols)].ravel()
    n = len(so)
    if n < 2:
        return 0.0
    uo = so[:, None] >= so[None, :]
    ue = se[:, None] >= se[None, :]
    flips = int(np.count_nonzero(uo != ue))
    return 1000.0 * flips / (n * n - n)


def bright_loss(pred: np.ndarray, target: np.ndarray, lam: float = 10.0) -> float:
    """Mean of S(pred - target) where S leaves overshoot alone and scales
    undershoot by lam (penalizing results darker than the target)."""
    x, y = _pair(pred, target)
    diff = x - y
    return float(np.mean(np.where(diff < 0.0, -lam * diff, diff)))


def structural_loss(
    pred: np.ndarray, target: np.ndarray, params: SsimParams = SsimParams()
) -> float:
    """1 - ssim(pred, target)."""
    return 1.0 - ssim(pred, target, params)


def regional_loss(
    pred: np.ndarray,
    target: np.ndarray,
    attention: np.ndarray,
    params: SsimParams = SsimParams(),
) -> float:
    """Attention-masked mean absolute error plus masked structural loss."""
    x, y = _pair(pred, target)
    mask = require_plane(attention)
    if mask.shape != x.shape[:2]:
        raise ContractError(
            f"attention shape {mask.shape} does not match images {x.shape[:2]}"
        )
    mx = x * mask[:, :, None]
    my = y * mask[:, :, None]
    mae = float(np.mean(np.abs(mx - my)))
    return mae + structural_loss(mx, my, params)


def map_l2(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error between two supervision maps."""
    x = require_plane(pred)
    y = require_plane(target)
    if x.shape != y.shape:
        raise ContractError(f"map shapes differ: {x.shape} vs {y.shape}")
    return float(np.mean((x - y) ** 2))


def map_l1(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean absolute error between two supervision maps."""
    x = require_plane(pred)
    y = require_plane(target)
    if x.shape != y.shape:
        raise ContractError(f"map shapes differ: {x.shape} vs {y.shape}")
    return float(np.mean(np.abs(x - y)))


def composite_loss(
    pred: np.ndarray,
    target: np.ndarray,
    attention: np.ndarray,
    weights: LossWeights = LossWeights(),
    params: SsimParams = SsimParams(),
) -> float:
    """Weighted sum of brightness, structural, and regional losses."""
    return (
        weights.w_eb * bright_loss(pred, target, weights.lam)
        + weights.w_es * structural_loss(pred, target, params)
        + weights.w_er * regional_loss(pred, target, attention, params)
    )


def quality_report(
    pred: np.ndarray,
    ref: np.ndarray,
    attention: np.ndarray | None = None,
    weights: LossWeights = LossWeights(),
    params: SsimParams = SsimParams(),
) -> QualityReport:
    """All metrics for one prediction/reference pair.

    Regional and composite entries are None when no attention map is given.
    """
    regional = composite = None
    if attention is not None:
        regional = regional_loss(pred, ref, attention, params)
        composite = composite_loss(pred, ref, attention, weights, params)
    return QualityReport(
        psnr=psnr(pred, ref),
        ssim=ssim(pred, ref, params),
        brightness_delta=average_brightness_delta(pred, ref),
        loe=loe(pred, ref),
        bright_loss=bright_loss(pred, ref, weights.lam),
        structural_loss=structural_loss(pred, ref, params),
        regional_loss=regional,
        composite=composite,
    )
