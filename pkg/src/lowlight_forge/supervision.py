"""Supervision targets for enhancement training: attention and noise maps.

The attention map ranks pixels by how much light they lost between a bright
frame and its darkened counterpart; the noise map measures the relative
perturbation a noisy rendering adds over the noise-free one. Both are stored
as 16-bit grayscale PNG.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .errors import ContractError, FormatError
from .image import dequantize, quantize, require_image, require_plane, value_plane

EPS = 1e-4


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ContractError(f"image shapes differ: {a.shape} vs {b.shape}")


def ue_attention_map(bright: np.ndarray, dark: np.ndarray) -> np.ndarray:
    """Relative loss of the channel maximum: |max_c(I) - max_c(F(I))| / max_c(I).

    Pixels whose bright-side maximum falls below EPS map to zero. The result
    is clamped to [0, 1].
    """
    b = require_image(bright)
    d = require_image(dark)
    _require_same_shape(b, d)
    mb = b.max(axis=2)
    md = d.max(axis=2)
    ratio = np.abs(mb - md) / np.maximum(mb, EPS)
    return np.clip(np.where(mb < EPS, 0.0, ratio), 0.0, 1.0)


def noise_map(noisy: np.ndarray, clean: np.ndarray) -> np.ndarray:
    """Channel maximum of |noisy - clean| / max(clean, EPS), clamped to [0, 1]."""
    n = require_image(noisy)
    c = require_image(clean)
    _require_same_shape(n, c)
    rel = np.abs(n - c) / np.maximum(c, EPS)
    return np.clip(rel.max(axis=2), 0.0, 1.0)


def save_map(path, plane: np.ndarray) -> None:
    """Write a supervision map as 16-bit grayscale PNG."""
    arr = require_plane(plane)
    if not cv2.imwrite(os.fspath(path), quantize(arr, 16)):
        raise OSError(f"could not write map file: {path}")


def load_map(path) -> np.ndarray:
    """Read a 16-bit grayscale PNG supervision map back to [0, 1] floats."""
    path = os.fspath(path)
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        if not os.path.exists(path):
            raise OSError(f"no such file: {path}")
        raise FormatError(f"could not decode map file: {path}")
    if raw.ndim != 2 or raw.dtype != np.uint16:
        raise FormatError(
            f"expected 16-bit grayscale map, got {raw.dtype} with shape {raw.shape}"
        )
    return dequantize(raw)


def map_to_image(plane: np.ndarray) -> np.ndarray:
    """Replicate a map to three channels, for visualization or masking."""
    arr = require_plane(plane)
    return np.repeat(arr[:, :, None], 3, axis=2)
