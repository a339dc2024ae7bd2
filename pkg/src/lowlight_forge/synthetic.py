"""Deterministic synthetic images for demos and self-checks.

Charts are bright, sharp, and saturated so they clear practical selection
thresholds; the corpus builder also mixes in a few frames engineered to fail
one screening check each.
"""

from __future__ import annotations

import os

import numpy as np

from .image import clamp01, save_image

# saturated palette on [0, 1]
_PALETTE = np.array(
    [
        [0.95, 0.15, 0.10],
        [0.10, 0.85, 0.20],
        [0.15, 0.25, 0.95],
        [0.95, 0.85, 0.10],
        [0.90, 0.20, 0.90],
        [0.10, 0.85, 0.90],
        [0.95, 0.55, 0.10],
        [0.35, 0.95, 0.55],
    ]
)


def gradient_ramp(size: int = 256, horizontal: bool = True) -> np.ndarray:
    """Gray ramp sweeping 0 to 1 across one axis."""
    t = np.linspace(0.0, 1.0, size)
    plane = np.tile(t, (size, 1)) if horizontal else np.tile(t[:, None], (1, size))
    return np.repeat(plane[:, :, None], 3, axis=2)


def color_chart(size: int = 128, seed: int = 0) -> np.ndarray:
    """Bright saturated chart: random color patches over a light background,
    crossed by thin dark gridlines that keep the Laplacian response high."""
    rng = np.random.default_rng(seed)
    img = np.full((size, size, 3), 0.92)
    n_rects = int(rng.integers(8, 16))
    for _ in range(n_rects):
        h = int(rng.integers(size // 8, size // 2))
        w = int(rng.integers(size // 8, size // 2))
        y = int(rng.integers(0, size - h + 1))
        x = int(rng.integers(0, size - w + 1))
        color = _PALETTE[int(rng.integers(len(_PALETTE)))]
        jitter = rng.uniform(-0.05, 0.05, 3)
        img[y : y + h, x : x + w] = np.clip(color + jitter, 0.05, 1.0)
    step = max(8, size // 10)
    img[::step, :, :] = 0.05
    img[:, ::step, :] = 0.05
    return clamp01(img)


def box_blur(image: np.ndarray, radius: int) -> np.ndarray:
    """Separable box blur with edge padding (used to soften test frames)."""
    if radius < 1:
        return np.array(image, dtype=np.float64, copy=True)
    k = 2 * radius + 1
    arr = np.asarray(image, dtype=np.float64)
    pad_spec = ((radius, radius),) + ((0, 0),) * (arr.ndim - 1)
    p = np.pad(arr, pad_spec, mode="edge")
    arr = sum(p[i : i + arr.shape[0]] for i in range(k)) / k
    pad_spec = ((0, 0), (radius, radius)) + ((0, 0),) * (arr.ndim - 2)
    p = np.pad(arr, pad_spec, mode="edge")
    return sum(p[:, i : i + arr.shape[1]] for i in range(k)) / k


def demo_corpus(dest_dir, count: int = 20, size: int = 96, seed: int = 7) -> list[str]:
    """Write a deterministic PNG corpus and return the file paths.

    Most frames are selectable charts; the last three (when count allows) are
    a dark frame, a blurred frame, and a gray low-color frame so a pipeline
    run exercises every rejection path.
    """
    os.makedirs(dest_dir, exist_ok=True)
    paths = []
    for i in range(count):
        img = color_chart(size=size, seed=seed * 1000 + i)
        if count >= 6:
            if i == count - 3:
                img = img * 0.08
            elif i == count - 2:
                img = box_blur(img, max(2, size // 24))
            elif i == count - 1:
                img = np.repeat(img.mean(axis=2)[:, :, None], 3, axis=2)
        path = os.path.join(os.fspath(dest_dir), f"frame_{i:03d}.png")
        save_image(path, clamp01(img), depth=8)
        paths.append(path)
    return paths
