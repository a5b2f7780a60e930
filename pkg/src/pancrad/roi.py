"""Bounding-box ROI extraction and 2D slice export."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import EmptyMaskError, PancradError, RangeError

PLANES = {"sagittal": 0, "coronal": 1, "axial": 2}


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive voxel index ranges ``lo[a]..hi[a]`` per axis."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise PancradError("bounding box needs three axes")
        if any(a > b for a, b in zip(lo, hi)):
            raise PancradError(f"box lo {lo} exceeds hi {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shape(self):
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def slices(self):
        return tuple(slice(a, b + 1) for a, b in zip(self.lo, self.hi))

    def contains(self, other):
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def check_within(self, dims):
        if any(a < 0 for a in self.lo) or any(b >= n for b, n in zip(self.hi, dims)):
            raise RangeError(f"box {self.lo}..{self.hi} is outside grid dims {tuple(dims)}")


def mask_bounding_box(mask):
    """Tightest box around the mask foreground."""
    fg = np.asarray(mask.voxels) > 0
    if not fg.any():
        raise EmptyMaskError("mask has no foreground voxels")
    lo, hi = [], []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        idx = np.flatnonzero(fg.any(axis=other))
        lo.append(idx[0])
        hi.append(idx[-1])
    return BoundingBox(tuple(lo), tuple(hi))


def expand_box(box, fraction, dims):
    """Grow each axis by ``fraction`` of its extent, half on either side.

    Margins round outward and the result is clamped to the grid.
    """
    if fraction < 0:
        raise PancradError(f"expansion fraction must be >= 0, got {fraction}")
    box.check_within(dims)
    lo, hi = [], []
    for a, b, n in zip(box.lo, box.hi, dims):
        # rounding guard keeps exact half-voxel products like 0.1*20/2 from drifting past an integer
        margin = round(fraction / 2 * (b - a + 1), 9)
        lo.append(max(0, math.floor(a - margin)))
        hi.append(min(n - 1, math.ceil(b + margin)))
    return BoundingBox(tuple(lo), tuple(hi))


def crop(grid, box):
    """Crop a Volume or Mask; the origin moves to the world position of ``box.lo``."""
    box.check_within(grid.dims)
    data = np.asarray(grid.voxels)[box.slices]
    origin = tuple(float(c) for c in grid.index_to_world(box.lo))
    return grid.with_voxels(data, origin=origin)


def _bilinear(image, height, width):
    rows, cols = image.shape
    ys = np.linspace(0.0, rows - 1, height) if height > 1 else np.zeros(1)
    xs = np.linspace(0.0, cols - 1, width) if width > 1 else np.zeros(1)
    y0 = np.clip(np.floor(ys).astype(int), 0, max(rows - 2, 0))
    x0 = np.clip(np.floor(xs).astype(int), 0, max(cols - 2, 0))
    y1 = np.minimum(y0 + 1, rows - 1)
    x1 = np.minimum(x0 + 1, cols - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = image[np.ix_(y0, x0)] * (1 - wx) + image[np.ix_(y0, x1)] * wx
    bottom = image[np.ix_(y1, x0)] * (1 - wx) + image[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


def normalize_slice(image):
    lo, hi = float(image.min()), float(image.max())
    if hi <= lo:
        return np.zeros_like(image, dtype=np.float64)
    return (image - lo) / (hi - lo)


def export_slices(volume, target=(224, 224), plane="axial"):
    """Resample every slice of ``volume`` to ``target = (width, height)``.

    Images are indexed ``[row, column]``; for axial slices rows follow y and
    columns follow x. Each slice is min-max scaled to [0, 1] before bilinear
    resampling with corner-aligned sample positions.
    """
    width, height = target
    axis = PLANES[plane]
    data = np.asarray(volume.voxels, dtype=np.float64)
    images = []
    for k in range(data.shape[axis]):
        plane_2d = np.take(data, k, axis=axis).T
        images.append(_bilinear(normalize_slice(plane_2d), height, width))
    return images


def write_pgm(image, path):
    """Write a [0, 1] image as 16-bit binary PGM (P5)."""
    scaled = np.round(np.clip(image, 0.0, 1.0) * 65535).astype(">u2")
    height, width = scaled.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n65535\n".encode("ascii") + scaled.tobytes())
