"""Fixed-bin-width gray-level discretization shared by the texture families."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..exceptions import EmptyMaskError, PancradError
from ..roi import crop, mask_bounding_box
from ..volume import check_aligned

EPSILON = 2.2e-16


@dataclass(frozen=True)
class TextureConfig:
    bin_width: float = 25.0
    glcm_distance: int = 1
    gldm_alpha: int = 0
    ngtdm_distance: int = 1
    epsilon: float = EPSILON

    def __post_init__(self):
        if not self.bin_width > 0:
            raise PancradError(f"bin_width must be positive, got {self.bin_width}")
        if int(self.glcm_distance) < 1 or int(self.ngtdm_distance) < 1:
            raise PancradError("glcm_distance and ngtdm_distance must be >= 1")
        if int(self.gldm_alpha) < 0:
            raise PancradError("gldm_alpha must be >= 0")
        if not self.epsilon > 0:
            raise PancradError("epsilon must be positive")


@dataclass(frozen=True, eq=False)
class DiscretizedRoi:
    """Integer level grid: 0 outside the mask, 1..ng inside."""

    levels: np.ndarray
    ng: int
    bin_width: float
    min_intensity: float

    @property
    def n_voxels(self):
        return int(np.count_nonzero(self.levels))


def bin_levels(values, bin_width, anchor):
    return (np.floor((values - anchor) / bin_width) + 1).astype(np.int64)


def discretize(volume, mask, config=None):
    """Bin in-mask intensities with fixed width anchored at the in-mask minimum.

    The level grid is cropped to the mask's bounding box.
    """
    config = config or TextureConfig()
    check_aligned(volume, mask)
    if not np.any(mask.voxels):
        raise EmptyMaskError("cannot discretize an empty mask")
    box = mask_bounding_box(mask)
    vox = np.asarray(crop(volume, box).voxels)
    inside = np.asarray(crop(mask, box).voxels) > 0
    anchor = float(vox[inside].min())
    levels = np.zeros(vox.shape, dtype=np.int64)
    levels[inside] = bin_levels(vox[inside], config.bin_width, anchor)
    return DiscretizedRoi(levels, int(levels.max()), float(config.bin_width), anchor)


def unique_directions(distance=1):
    """The 13 direction vectors with one of each +/- pair, scaled by ``distance``."""
    dirs = []
    for d in itertools.product((-1, 0, 1), repeat=3):
        if d > (0, 0, 0):
            dirs.append(tuple(distance * c for c in d))
    return dirs


def neighbour_offsets(distance=1):
    """All offsets of the Chebyshev ball of radius ``distance`` except the centre."""
    rng = range(-distance, distance + 1)
    return [d for d in itertools.product(rng, repeat=3) if d != (0, 0, 0)]


def pair_views(levels, offset):
    """Views ``(a, b)`` such that ``b[idx]`` sits at ``offset`` from ``a[idx]``."""
    src, dst = [], []
    for delta, n in zip(offset, levels.shape):
        if abs(delta) >= n:
            return None
        if delta >= 0:
            src.append(slice(0, n - delta))
            dst.append(slice(delta, n))
        else:
            src.append(slice(-delta, n))
            dst.append(slice(0, n + delta))
    return levels[tuple(src)], levels[tuple(dst)]


def padded_neighbours(levels, distance):
    """Yield the level grid shifted by every neighbour offset (zero outside)."""
    padded = np.pad(levels, distance)
    nx, ny, nz = levels.shape
    for dx, dy, dz in neighbour_offsets(distance):
        yield padded[distance + dx:distance + dx + nx,
                     distance + dy:distance + dy + ny,
                     distance + dz:distance + dz + nz]
