"""Candidate screening: oversegmentation plus darkness, blur, and color scores.

A frame qualifies as a synthesis source only when it is sufficiently bright,
sharp, and colorful. Brightness is judged per superpixel region; blur and
colorfulness are global scores with fixed thresholds on the 0-255 scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, ContractError
from .image import luma_plane, require_image, rgb_to_lab, value_plane

LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class SelectionConfig:
    segment_size: int = 32
    block_mean_thresh: float = 0.35
    block_var_thresh: float = 0.001
    block_combine: str = "or"
    dark_fraction_thresh: float = 0.85
    blur_thresh: float = 500.0
    color_thresh: float = 500.0
    slic_compactness: float = 10.0
    slic_iters: int = 10

    def __post_init__(self):
        if self.segment_size < 4:
            raise ConfigurationError(f"segment_size must be >= 4, got {self.segment_size}")
        if self.block_combine not in ("or", "and"):
            raise ConfigurationError(
                f"block_combine must be 'or' or 'and', got {self.block_combine!r}"
            )
        if not 0.0 <= self.dark_fraction_thresh <= 1.0:
            raise ConfigurationError(
                f"dark_fraction_thresh must lie in [0, 1], got {self.dark_fraction_thresh}"
            )
        for name in ("block_mean_thresh", "block_var_thresh", "blur_thresh", "color_thresh"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.slic_compactness <= 0:
            raise ConfigurationError(f"slic_compactness must be > 0, got {self.slic_compactness}")
        if self.slic_iters < 1:
            raise ConfigurationError(f"slic_iters must be >= 1, got {self.slic_iters}")


@dataclass(frozen=True)
class SelectionReport:
    bright_fraction: float
    blur_variance: float
    colorfulness: float
    darkness_pass: bool
    blur_pass: bool
    color_pass: bool
    selected: bool


def laplacian_response(plane: np.ndarray) -> np.ndarray:
    """3x3 Laplacian with replicate borders, same shape as the input."""
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractError(f"expected an (H, W) plane, got shape {arr.shape}")
    p = np.pad(arr, 1, mode="edge")
    h, w = arr.shape
    return (
        p[0:h, 1 : w + 1]
        + p[2 : h + 2, 1 : w + 1]
        + p[1 : h + 1, 0:w]
        + p[1 : h + 1, 2 : w + 2]
        - 4.0 * arr
    )


def _seed_centers(h: int, w: int, step: int) -> tuple[np.ndarray, np.ndarray]:
    ny = max(1, round(h / step))
    nx = max(1, round(w / step))
    ys = np.floor((np.arange(ny) + 0.5) * h / ny).astype(int)
    xs = np.floor((np.arange(nx) + 0.5) * w / nx).astype(int)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return grid_y.ravel(), grid_x.ravel()


def _enforce_connectivity(labels: np.ndarray, min_size: int) -> np.ndarray:
    """Split disjoint fragments, then absorb fragments below min_size into a
    4-connected neighbor. Final ids are contiguous, in raster order of first
    appearance."""
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    next_id = 0
    for k, box in enumerate(ndimage.find_objects(labels + 1)):
        if box is None:
            continue
        mask = labels[box] == k
        sub, n = ndimage.label(mask, structure=_FOUR_CONNECTED)
        comp[box][mask] = sub[mask] + next_id - 1
        next_id += n
    # first-pixel raster position per component, for a deterministic merge order
    flat = comp.ravel()
    first_pos = np.full(next_id, flat.size, dtype=np.int64)
    np.minimum.at(first_pos, flat, np.arange(flat.size))
    areas = np.bincount(flat, minlength=next_id)

    # adjacency over 4-connected boundary pairs
    pairs = np.concatenate(
        [
            np.stack([comp[:, :-1].ravel(), comp[:, 1:].ravel()], axis=1),
            np.stack([comp[:-1, :].ravel(), comp[1:, :].ravel()], axis=1),
        ]
    )
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    neighbors: dict[int, set[int]] = {i: set() for i in range(next_id)}
    for a, b in np.unique(pairs, axis=0):
        neighbors[int(a)].add(int(b))
        neighbors[int(b)].add(int(a))

    parent = np.arange(next_id)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    merged_area = areas.copy()
    for i in np.argsort(first_pos, kind="stable"):
        i = int(i)
        root = find(i)
        if merged_area[root] >= min_size or not neighbors[i]:
            continue
        target = min(
            (n for n in neighbors[i] if find(n) != root),
            key=lambda n: first_pos[n],
            default=None,
        )
        if target is None:
            continue
        troot = find(target)
        parent[root] = troot
        merged_area[troot] += merged_area[root]

    roots = np.array([find(i) for i in range(next_id)])
    final = roots[comp].ravel()
    # relabel to 0..n-1 in raster order of first appearance
    uniq, first_seen, inverse = np.unique(final, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first_seen, kind="stable")] = np.arange(len(uniq))
    return rank[inverse].reshape(h, w).astype(np.int32)


def oversegment(image: np.ndarray, segment_size: int = 32, compactness: float = 10.0,
                iterations: int = 10) -> np.ndarray:
    """SLIC-style superpixels over (L, a, b, x, y) features.

    Returns an (H, W) int32 label plane. Every pixel is labeled, regions are
    4-connected, and the region count is approximately
    (width * height) / segment_size**2. Images smaller than one segment
    collapse to a single region.
    """
    img = require_image(image)
    if segment_size < 4:
        raise ConfigurationError(f"segment_size must be >= 4, got {segment_size}")
    h, w = img.shape[:2]
    lab = rgb_to_lab(img)
    cy, cx = _seed_centers(h, w, segment_size)
    n_seed = len(cy)
    if n_seed == 1:
        return np.zeros((h, w), dtype=np.int32)

    centers = np.empty((n_seed, 5))
    centers[:, :3] = lab[cy, cx]
    centers[:, 3] = cy
    centers[:, 4] = cx

    spatial = (compactness / segment_size) ** 2
    yy, xx = np.mgrid[0:h, 0:w]
    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(iterations):
        best = np.full((h, w), np.inf)
        labels.fill(-1)
        for k in range(n_seed):
            l0, a0, b0, ky, kx = centers[k]
            r0 = max(0, int(ky) - segment_size)
            r1 = min(h, int(ky) + segment_size + 1)
            c0 = max(0, int(kx) - segment_size)
            c1 = min(w, int(kx) + segment_size + 1)
            win = lab[r0:r1, c0:c1]
            d_color = (
                (win[:, :, 0] - l0) ** 2
                + (win[:, :, 1] - a0) ** 2
                + (win[:, :, 2] - b0) ** 2
            )
            d_space = (yy[r0:r1, c0:c1] - ky) ** 2 + (xx[r0:r1, c0:c1] - kx) ** 2
            dist = d_color + spatial * d_space
            closer = dist < best[r0:r1, c0:c1]
            best[r0:r1, c0:c1][closer] = dist[closer]
            labels[r0:r1, c0:c1][closer] = k
        # pixels outside every search window: nearest seed spatially
        orphan = labels < 0
        if orphan.any():
            oy, ox = np.nonzero(orphan)
            d = (oy[:, None] - centers[None, :, 3]) ** 2 + (
                ox[:, None] - centers[None, :, 4]
            ) ** 2
            labels[oy, ox] = np.argmin(d, axis=1)
        counts = np.bincount(labels.ravel(), minlength=n_seed)
        occupied = counts > 0
        for axis, values in enumerate(
            (lab[:, :, 0], lab[:, :, 1], lab[:, :, 2], yy, xx)
        ):
            sums = np.bincount(labels.ravel(), weights=values.ravel(), minlength=n_seed)
            centers[occupied, axis] = sums[occupied] / counts[occupied]

    min_size = max(1, (segment_size * segment_size) // 4)
    return _enforce_connectivity(labels, min_size)


def darkness_estimate(
    image: np.ndarray, labels: np.ndarray, config: SelectionConfig = SelectionConfig()
) -> float:
    """Fraction of regions that are well exposed.

    A region counts as exposed when its value-plane mean or variance (or
    both, per block_combine) clears its threshold."""
    img = require_image(image)
    lab = np.asarray(labels)
    if lab.shape != img.shape[:2]:
        raise ContractError(
            f"label plane shape {lab.shape} does not match image {img.shape[:2]}"
        )
    v = value_plane(img).ravel()
    flat = lab.ravel()
    n_regions = int(flat.max()) + 1
    counts = np.bincount(flat, minlength=n_regions).astype(np.float64)
    if (counts == 0).any():
        raise ContractError("label ids must be contiguous from 0")
    s1 = np.bincount(flat, weights=v, minlength=n_regions)
    s2 = np.bincount(flat, weights=v * v, minlength=n_regions)
    mean = s1 / counts
    var = np.maximum(s2 / counts - mean * mean, 0.0)
    lit = mean > config.block_mean_thresh
    textured = var > config.block_var_thresh
    exposed = (lit & textured) if config.block_combine == "and" else (lit | textured)
    return float(exposed.mean())


def blur_estimate(image: np.ndarray) -> float:
    """Variance of the 3x3 Laplacian response on 0-255 luma."""
    response = laplacian_response(luma_plane(require_image(image)) * 255.0)
    return float(np.var(response))


def colorfulness(image: np.ndarray) -> float:
    """Opponent-axis colorfulness on the 0-255 scale: the joint spread of
    rg = R - G and yb = (R + G)/2 - B plus 0.3 times their joint mean
    magnitude."""
    img = require_image(image) * 255.0
    rg = img[:, :, 0] - img[:, :, 1]
    yb = 0.5 * (img[:, :, 0] + img[:, :, 1]) - img[:, :, 2]
    return float(
        np.sqrt(np.var(rg) + np.var(yb))
        + 0.3 * np.sqrt(np.mean(rg) ** 2 + np.mean(yb) ** 2)
    )


def select(image: np.ndarray, config: SelectionConfig = SelectionConfig()) -> SelectionReport:
    """Score one candidate frame; selected only if all three checks pass."""
    img = require_image(image)
    labels = oversegment(
        img, config.segment_size, config.slic_compactness, config.slic_iters
    )
    bright_fraction = darkness_estimate(img, labels, config)
    blur_variance = blur_estimate(img)
    color_score = colorfulness(img)
    darkness_pass = bright_fraction > config.dark_fraction_thresh
    blur_pass = blur_variance > config.blur_thresh
    color_pass = color_score > config.color_thresh
    return SelectionReport(
        bright_fraction=bright_fraction,
        blur_variance=blur_variance,
        colorfulness=color_score,
        darkness_pass=darkness_pass,
        blur_pass=blur_pass,
        color_pass=color_pass,
        selected=darkness_pass and blur_pass and color_pass,
    )
