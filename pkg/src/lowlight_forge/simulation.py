"""Low-light pair synthesis: exposure darkening and sensor noise.

Darkening applies out = beta * (alpha * in) ** gamma per channel. Noise runs
the image through a camera-response round trip: decode to linear, sample a
Bayer mosaic, apply signal-dependent Poisson noise and additive Gaussian read
noise, clamp, demosaic bilinearly, and re-encode.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, ContractError, FormatError
from .image import clamp01, require_image

ALPHA_RANGE = (0.9, 1.0)
BETA_RANGE = (0.5, 1.0)
GAMMA_RANGE = (1.5, 5.0)

SIGMA_P2_RANGE = (0.0, 0.01)
SIGMA_G_RANGE = (0.0, 0.03)

# (row % 2, col % 2) -> channel index for each supported Bayer layout
BAYER_PATTERNS = {
    "RGGB": ((0, 1), (1, 2)),
    "BGGR": ((2, 1), (1, 0)),
    "GRBG": ((1, 0), (2, 1)),
    "GBRG": ((1, 2), (0, 1)),
}

_CRF_TABLE_SIZE = 1024


@dataclass(frozen=True)
class SimulationParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigurationError(f"beta must lie in (0, 1], got {self.beta}")
        if self.gamma < 1.0:
            raise ConfigurationError(f"gamma must be >= 1, got {self.gamma}")


@dataclass(frozen=True)
class NoiseParams:
    sigma_p: float = 0.0
    sigma_g: float = 0.0
    crf: str = "srgb"
    bayer_pattern: str = "RGGB"
    seed: int = 0

    def __post_init__(self):
        if self.sigma_p < 0.0:
            raise ConfigurationError(f"sigma_p must be >= 0, got {self.sigma_p}")
        if self.sigma_g < 0.0:
            raise ConfigurationError(f"sigma_g must be >= 0, got {self.sigma_g}")
        if self.bayer_pattern not in BAYER_PATTERNS:
            raise ConfigurationError(
                f"bayer_pattern must be one of {sorted(BAYER_PATTERNS)}, "
                f"got {self.bayer_pattern!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned value, got {self.seed}")


@dataclass(frozen=True)
class NoiseSampling:
    """Ranges the pipeline draws per-image noise parameters from."""

    sigma_p2_range: tuple[float, float] = SIGMA_P2_RANGE
    sigma_g_range: tuple[float, float] = SIGMA_G_RANGE
    crf: str = "srgb"
    bayer_pattern: str = "RGGB"

    def __post_init__(self):
        for name in ("sigma_p2_range", "sigma_g_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ConfigurationError(f"{name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})")
        if self.bayer_pattern not in BAYER_PATTERNS:
            raise ConfigurationError(
                f"bayer_pattern must be one of {sorted(BAYER_PATTERNS)}, "
                f"got {self.bayer_pattern!r}"
            )


def sample_params(rng: np.random.Generator) -> SimulationParams:
    """Draw darkening parameters: alpha ~ U(0.9, 1), beta ~ U(0.5, 1),
    gamma ~ U(1.5, 5), in that order."""
    return SimulationParams(
        alpha=float(rng.uniform(*ALPHA_RANGE)),
        beta=float(rng.uniform(*BETA_RANGE)),
        gamma=float(rng.uniform(*GAMMA_RANGE)),
    )


def sample_noise_params(rng: np.random.Generator, sampling: NoiseSampling = NoiseSampling()) -> NoiseParams:
    """Draw noise parameters: the Poisson strength squared and the Gaussian
    sigma come from uniform ranges, then a fresh synthesis seed."""
    sigma_p2 = float(rng.uniform(*sampling.sigma_p2_range))
    sigma_g = float(rng.uniform(*sampling.sigma_g_range))
    seed = int(rng.integers(0, 2**63))
    return NoiseParams(
        sigma_p=float(np.sqrt(sigma_p2)),
        sigma_g=sigma_g,
        crf=sampling.crf,
        bayer_pattern=sampling.bayer_pattern,
        seed=seed,
    )


def darken(image: np.ndarray, params: SimulationParams) -> np.ndarray:
    """Apply out = beta * (alpha * in) ** gamma per channel, clamped."""
    img = require_image(image)
    return clamp01(params.beta * np.power(params.alpha * img, params.gamma))


# ---------------------------------------------------------------------------
# Camera response curves
# ---------------------------------------------------------------------------

def resolve_crf(identifier):
    """Resolve a curve identifier to an internal representation.

    Accepts "srgb", "linear", a path to a JSON or whitespace-separated file
    holding 1024 encoded values on a uniform linear-domain grid, or such a
    table directly. Tables must be strictly increasing from 0 to 1.
    """
    if isinstance(identifier, str):
        if identifier in ("srgb", "linear"):
            return identifier
        if os.path.exists(identifier):
            if identifier.endswith(".json"):
                with open(identifier) as fh:
                    table = np.asarray(json.load(fh), dtype=np.float64)
            else:
                table = np.loadtxt(identifier, dtype=np.float64).ravel()
            return _validate_crf_table(table)
        raise ConfigurationError(f"unknown camera response curve: {identifier!r}")
    return _validate_crf_table(np.asarray(identifier, dtype=np.float64))


def _validate_crf_table(table: np.ndarray) -> np.ndarray:
    if table.ndim != 1 or len(table) != _CRF_TABLE_SIZE:
        raise ConfigurationError(
            f"curve tables must hold {_CRF_TABLE_SIZE} values, got shape {table.shape}"
        )
    if not np.all(np.diff(table) > 0):
        raise ConfigurationError("curve table must be strictly increasing to be invertible")
    if table[0] != 0.0 or table[-1] != 1.0:
        raise ConfigurationError("curve table must span exactly [0, 1]")
    return table


def _srgb_encode(x: np.ndarray) -> np.ndarray:
    y = np.where(x <= 0.0031308, 12.92 * x, 1.055 * np.power(x, 1.0 / 2.4) - 0.055)
    return np.where(x >= 1.0, 1.0, y)


def _srgb_decode(x: np.ndarray) -> np.ndarray:
    y = np.where(x <= 0.04045, x / 12.92, np.power((x + 0.055) / 1.055, 2.4))
    return np.where(x >= 1.0, 1.0, y)


def crf_apply(linear: np.ndarray, crf="srgb") -> np.ndarray:
    """Encode linear intensities through the camera response curve."""
    curve = resolve_crf(crf)
    arr = np.asarray(linear, dtype=np.float64)
    if isinstance(curve, str):
        return _srgb_encode(arr) if curve == "srgb" else arr.copy()
    grid = np.linspace(0.0, 1.0, _CRF_TABLE_SIZE)
    return np.interp(arr, grid, curve)


def crf_invert(encoded: np.ndarray, crf="srgb") -> np.ndarray:
    """Decode camera-response values back to linear intensities."""
    curve = resolve_crf(crf)
    arr = np.asarray(encoded, dtype=np.float64)
    if isinstance(curve, str):
        return _srgb_decode(arr) if curve == "srgb" else arr.copy()
    grid = np.linspace(0.0, 1.0, _CRF_TABLE_SIZE)
    return np.interp(arr, curve, grid)


# ---------------------------------------------------------------------------
# Bayer sampling
# ---------------------------------------------------------------------------

def mosaic(image: np.ndarray, pattern: str = "RGGB") -> np.ndarray:
    """Sample one channel per pixel following the Bayer layout."""
    img = require_image(image)
    if pattern not in BAYER_PATTERNS:
        raise ConfigurationError(f"unknown Bayer pattern {pattern!r}")
    h, w = img.shape[:2]
    if h % 2 or w % 2:
        raise ContractError(f"mosaic needs even dimensions, got {h}x{w}")
    chans = BAYER_PATTERNS[pattern]
    bayer = np.empty((h, w), dtype=np.float64)
    for r in (0, 1):
        for c in (0, 1):
            bayer[r::2, c::2] = img[r::2, c::2, chans[r][c]]
    return bayer


def demosaic(bayer: np.ndarray, pattern: str = "RGGB") -> np.ndarray:
    """Bilinear reconstruction of the two missing channels per site.

    Missing green comes from the four orthogonal neighbors; red and blue come
    from the two same-row or same-column neighbors at green sites and from the
    four diagonal neighbors at each other's sites. Borders replicate edge
    samples, which keeps constant planes exactly constant.
    """
    arr = np.asarray(bayer, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractError(f"expected an (H, W) mosaic plane, got shape {arr.shape}")
    if pattern not in BAYER_PATTERNS:
        raise ConfigurationError(f"unknown Bayer pattern {pattern!r}")
    h, w = arr.shape
    if h % 2 or w % 2:
        raise ContractError(f"demosaic needs even dimensions, got {h}x{w}")
    chans = BAYER_PATTERNS[pattern]

    p = np.pad(arr, 1, mode="edge")
    up = p[0:h, 1 : w + 1]
    down = p[2 : h + 2, 1 : w + 1]
    left = p[1 : h + 1, 0:w]
    right = p[1 : h + 1, 2 : w + 2]
    cross = ((up + down) + (left + right)) / 4.0
    vert = (up + down) / 2.0
    horz = (left + right) / 2.0
    diag = (
        (p[0:h, 0:w] + p[2 : h + 2, 2 : w + 2])
        + (p[0:h, 2 : w + 2] + p[2 : h + 2, 0:w])
    ) / 4.0

    out = np.empty((h, w, 3), dtype=np.float64)
    for r in (0, 1):
        for c in (0, 1):
            site = chans[r][c]
            row_channels = set(chans[r])
            sl = (slice(r, None, 2), slice(c, None, 2))
            for k in range(3):
                if k == site:
                    plane = arr
                elif k == 1:
                    plane = cross
                elif site == 1:
                    plane = horz if k in row_channels else vert
                else:
                    plane = diag
                out[sl[0], sl[1], k] = plane[sl]
    return out


def sensor_noise(
    bayer: np.ndarray, sigma_p: float, sigma_g: float, rng: np.random.Generator
) -> np.ndarray:
    """Signal-dependent noise on a linear-domain mosaic plane.

    Poisson scaling uses chi = sigma_p**2: x -> Pois(x / chi) * chi, so the
    variance at intensity x is x * sigma_p**2. Gaussian read noise with
    standard deviation sigma_g is added afterwards, then the plane is clamped
    to [0, 1]. Either stage is skipped when its sigma is zero.
    """
    out = np.asarray(bayer, dtype=np.float64)
    chi = sigma_p * sigma_p
    if chi > 0.0:
        out = rng.poisson(out / chi) * chi
    if sigma_g > 0.0:
        out = out + rng.normal(0.0, sigma_g, out.shape)
    return np.clip(out, 0.0, 1.0)


def synthesize_noise(image: np.ndarray, params: NoiseParams) -> np.ndarray:
    """Full in-camera noise path, deterministic given params.seed."""
    img = require_image(image)
    rng = np.random.default_rng(params.seed)
    h, w = img.shape[:2]
    pad_h, pad_w = h % 2, w % 2
    linear = crf_invert(img, params.crf)
    if pad_h or pad_w:
        mode = "reflect" if min(h, w) > 1 else "edge"
        linear = np.pad(linear, ((0, pad_h), (0, pad_w), (0, 0)), mode=mode)
    bayer = mosaic(clamp01(linear), params.bayer_pattern)
    noisy = sensor_noise(bayer, params.sigma_p, params.sigma_g, rng)
    rgb = demosaic(noisy, params.bayer_pattern)
    if pad_h or pad_w:
        rgb = rgb[:h, :w]
    return clamp01(crf_apply(rgb, params.crf))


def synthesize_pair(
    image: np.ndarray, sim: SimulationParams, noise: NoiseParams
) -> tuple[np.ndarray, np.ndarray]:
    """Darkened image and its noisy counterpart."""
    dark = darken(image, sim)
    return dark, synthesize_noise(dark, noise)
