"""Canonical reorientation and separable Gaussian denoising."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import PancradError, UnsupportedOrientationError

PERMUTATION_ATOL = 1e-3


@dataclass(frozen=True)
class GaussianParams:
    """Gaussian filter settings; ``sigma_mm`` is a scalar or a per-axis triple."""

    sigma_mm: float | tuple = 0.5
    truncation: float = 3.0

    def __post_init__(self):
        sig = self.sigmas()
        if not all(s > 0 for s in sig):
            raise PancradError(f"sigma_mm must be positive, got {self.sigma_mm}")
        if not self.truncation > 0:
            raise PancradError(f"truncation must be positive, got {self.truncation}")

    def sigmas(self):
        if np.ndim(self.sigma_mm) == 0:
            return (float(self.sigma_mm),) * 3
        sig = tuple(float(s) for s in self.sigma_mm)
        if len(sig) != 3:
            raise PancradError("sigma_mm needs one value or three")
        return sig


def axis_permutation(orientation, atol=PERMUTATION_ATOL):
    """Return ``(world_axis, sign)`` per voxel axis for an axis-aligned orientation."""
    orient = np.asarray(orientation, dtype=np.float64)
    world_axes, signs = [], []
    for j in range(3):
        col = orient[:, j]
        a = int(np.argmax(np.abs(col)))
        sign = 1 if col[a] > 0 else -1
        target = np.zeros(3)
        target[a] = sign
        if np.max(np.abs(col - target)) > atol:
            raise UnsupportedOrientationError(
                f"voxel axis {j} is oblique (direction {np.round(col, 4).tolist()}); resampling is not supported")
        world_axes.append(a)
        signs.append(sign)
    if sorted(world_axes) != [0, 1, 2]:
        raise UnsupportedOrientationError(f"orientation maps two voxel axes onto world axes {world_axes}")
    return world_axes, signs


def reorient_to_canonical(grid):
    """Permute/flip voxel axes so the orientation becomes the identity.

    Works on Volumes and Masks alike; no interpolation is performed, so the
    multiset of voxel values is preserved exactly.
    """
    world_axes, signs = axis_permutation(grid.orientation)
    data = np.asarray(grid.voxels)
    first = [0 if s > 0 else n - 1 for s, n in zip(signs, data.shape)]
    flip_axes = tuple(j for j in range(3) if signs[j] < 0)
    if flip_axes:
        data = np.flip(data, axis=flip_axes)
    order = [world_axes.index(a) for a in range(3)]
    data = np.ascontiguousarray(np.transpose(data, order))
    spacing = tuple(grid.spacing[j] for j in order)
    origin = tuple(float(c) for c in grid.index_to_world(first))
    if not flip_axes and order == [0, 1, 2]:
        origin = grid.origin
    return grid.with_voxels(data, spacing=spacing, origin=origin, orientation=np.eye(3))


def gaussian_kernel1d(sigma_vox, radius):
    """Sampled Gaussian on ``[-radius, radius]`` renormalized to unit sum."""
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (k / sigma_vox) ** 2)
    return w / w.sum()


def kernel_radius(sigma_mm, truncation, spacing):
    return max(1, int(math.ceil(truncation * sigma_mm / spacing)))


def axis_kernels(params, spacing):
    kernels = []
    for sigma, step in zip(params.sigmas(), spacing):
        radius = kernel_radius(sigma, params.truncation, step)
        kernels.append(gaussian_kernel1d(sigma / step, radius))
    return kernels


def convolve_axis(data, kernel, axis):
    """Correlate ``data`` with a symmetric 1D kernel along ``axis``.

    Boundaries mirror about the edge sample without repeating it
    (``d c b | a b c d | c b a``).
    """
    radius = len(kernel) // 2
    pad = [(0, 0)] * data.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(data, pad, mode="reflect")
    n = data.shape[axis]
    out = np.zeros_like(data, dtype=np.float64)
    for offset, weight in enumerate(kernel):
        out += weight * np.take(padded, np.arange(offset, offset + n), axis=axis)
    return out


def gaussian_denoise(volume, params=None):
    """Separable Gaussian smoothing, applied in x, y, z order."""
    params = params or GaussianParams()
    data = np.asarray(volume.voxels, dtype=np.float64)
    for axis, kernel in enumerate(axis_kernels(params, volume.spacing)):
        data = convolve_axis(data, kernel, axis)
    return volume.with_voxels(data)
