"""Image I/O and channel-plane extraction.

Images are numpy float64 arrays of shape (H, W, 3) with values in [0, 1].
Single-channel planes are (H, W) float64 arrays in the same range. All
functions treat their inputs as read-only and return fresh arrays.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .errors import ContractError, DomainError, FormatError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# sRGB -> XYZ (D65) matrix and white point, used for Lab conversion.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])


def clamp01(arr: np.ndarray) -> np.ndarray:
    """Clamp every sample to [0, 1]."""
    return np.clip(arr, 0.0, 1.0)


def require_image(image: np.ndarray) -> np.ndarray:
    """Validate an (H, W, 3) image in [0, 1] and return it as float64."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ContractError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractError(f"image has empty spatial dimensions: {arr.shape}")
    if not np.isfinite(arr).all():
        raise DomainError("image contains non-finite samples")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError("image samples fall outside [0, 1]")
    return arr


def require_plane(plane: np.ndarray) -> np.ndarray:
    """Validate an (H, W) plane in [0, 1] and return it as float64."""
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractError(f"expected an (H, W) plane, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractError(f"plane has empty spatial dimensions: {arr.shape}")
    if not np.isfinite(arr).all():
        raise DomainError("plane contains non-finite samples")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError("plane samples fall outside [0, 1]")
    return arr


def quantize(arr: np.ndarray, depth: int = 8) -> np.ndarray:
    """Map [0, 1] samples to integer code values at 8 or 16 bits."""
    if depth not in (8, 16):
        raise FormatError(f"unsupported depth {depth}, expected 8 or 16")
    scale = (1 << depth) - 1
    codes = np.rint(np.asarray(arr, dtype=np.float64) * scale)
    return codes.astype(np.uint8 if depth == 8 else np.uint16)


def dequantize(codes: np.ndarray) -> np.ndarray:
    """Map integer code values back to [0, 1] floats."""
    arr = np.asarray(codes)
    if arr.dtype == np.uint8:
        return arr / 255.0
    if arr.dtype == np.uint16:
        return arr / 65535.0
    raise FormatError(f"unsupported code dtype {arr.dtype}")


def load_image(path) -> np.ndarray:
    """Load an 8-bit or 16-bit PNG, or an 8-bit JPEG, as an (H, W, 3) image.

    Grayscale files are replicated to three channels; an alpha channel is
    dropped.
    """
    path = os.fspath(path)
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        if not os.path.exists(path):
            raise OSError(f"no such file: {path}")
        raise FormatError(f"could not decode image file: {path}")
    if raw.dtype not in (np.uint8, np.uint16):
        raise FormatError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 2:
        raw = np.stack([raw, raw, raw], axis=2)
    elif raw.ndim == 3 and raw.shape[2] == 4:
        raw = raw[:, :, :3]
    elif raw.ndim != 3 or raw.shape[2] != 3:
        raise FormatError(f"unsupported channel layout {raw.shape} in {path}")
    rgb = raw[:, :, ::-1]
    return dequantize(rgb)


def save_image(path, image: np.ndarray, depth: int = 8) -> None:
    """Write an image as PNG (or JPEG for .jpg paths) at the given bit depth."""
    img = require_image(image)
    codes = quantize(img, depth)
    bgr = np.ascontiguousarray(codes[:, :, ::-1])
    if not cv2.imwrite(os.fspath(path), bgr):
        raise OSError(f"could not write image file: {path}")


def value_plane(image: np.ndarray) -> np.ndarray:
    """Per-pixel maximum over the three channels (the HSV value plane)."""
    return require_image(image).max(axis=2)


def luma_plane(image: np.ndarray) -> np.ndarray:
    """BT.601 full-range luma: 0.299 R + 0.587 G + 0.114 B."""
    return require_image(image) @ LUMA_WEIGHTS


def histogram(plane: np.ndarray, bins: int = 256) -> np.ndarray:
    """Counts over uniform bins spanning [0, 1]; the last bin is closed."""
    arr = require_plane(plane)
    if bins < 1:
        raise ContractError(f"bins must be positive, got {bins}")
    counts, _ = np.histogram(arr, bins=bins, range=(0.0, 1.0))
    return counts


def rgb_to_lab(image: np.ndarray) -> np.ndarray:
    """Convert an sRGB image to CIELAB (D65 white point)."""
    img = require_image(image)
    linear = np.where(
        img <= 0.04045, img / 12.92, ((img + 0.055) / 1.055) ** 2.4
    )
    xyz = linear @ _RGB_TO_XYZ.T
    ratio = xyz / _WHITE_D65
    cube_root_cut = (6.0 / 29.0) ** 3
    f = np.where(
        ratio > cube_root_cut,
        np.cbrt(ratio),
        ratio / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0,
    )
    lab = np.empty_like(img)
    lab[:, :, 0] = 116.0 * f[:, :, 1] - 16.0
    lab[:, :, 1] = 500.0 * (f[:, :, 0] - f[:, :, 1])
    lab[:, :, 2] = 200.0 * (f[:, :, 1] - f[:, :, 2])
    return lab
