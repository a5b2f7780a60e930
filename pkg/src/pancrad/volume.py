"""Image grid containers: intensity volumes, binary masks and labelled cases."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import AlignmentError, PancradError

ALIGN_RTOL = 1e-4


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class _Grid:
    voxels: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)
    origin: tuple = (0.0, 0.0, 0.0)
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    _dtype = np.float64

    def __post_init__(self):
        vox = np.asarray(self.voxels)
        if vox.ndim != 3 or min(vox.shape) < 1:
            raise PancradError(f"voxels must be a non-empty 3D array, got shape {vox.shape}")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or not all(s > 0 for s in spacing):
            raise PancradError(f"spacing must be three positive values, got {self.spacing}")
        origin = tuple(float(o) for o in self.origin)
        if len(origin) != 3:
            raise PancradError(f"origin must have three components, got {self.origin}")
        orient = np.asarray(self.orientation, dtype=np.float64)
        if orient.shape != (3, 3) or abs(np.linalg.det(orient)) < 1e-12:
            raise PancradError("orientation must be a non-singular 3x3 matrix")
        object.__setattr__(self, "voxels", self._coerce(vox))
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "orientation", _frozen(orient, np.float64))

    def _coerce(self, vox):
        return _frozen(vox, self._dtype)

    @property
    def dims(self):
        return tuple(int(n) for n in self.voxels.shape)

    @property
    def affine(self):
        """4x4 voxel-index to world (mm) transform."""
        aff = np.eye(4)
        aff[:3, :3] = self.orientation * np.asarray(self.spacing)[None, :]
        aff[:3, 3] = self.origin
        return aff

    def index_to_world(self, index):
        idx = np.asarray(index, dtype=np.float64)
        return np.asarray(self.origin) + (self.orientation * np.asarray(self.spacing)) @ idx

    def with_voxels(self, voxels, **changes):
        """Copy of this grid's geometry around new voxel data."""
        geom = dict(spacing=self.spacing, origin=self.origin, orientation=self.orientation)
        geom.update(changes)
        return type(self)(voxels, **geom)


class Volume(_Grid):
    """Scalar CT volume stored as float64 in (x, y, z) index order."""


class Mask(_Grid):
    """Binary segmentation; voxels are uint8 in {0, 1}."""

    _dtype = np.uint8

    def _coerce(self, vox):
        if vox.dtype != np.bool_:
            uniq = np.unique(vox)
            if not np.all(np.isin(uniq, (0, 1))):
                raise PancradError("mask voxels must be exactly 0 or 1")
        return _frozen(vox, np.uint8)

    @property
    def count(self):
        return int(self.voxels.sum())

    @classmethod
    def from_volume(cls, volume, threshold=0.5):
        return cls(np.asarray(volume.voxels) > threshold, spacing=volume.spacing,
                   origin=volume.origin, orientation=volume.orientation)


def check_aligned(a, b, rtol=ALIGN_RTOL):
    """Raise :class:`AlignmentError` unless two grids share dims, spacing and orientation."""
    if a.dims != b.dims:
        raise AlignmentError(f"dims differ: {a.dims} vs {b.dims}")
    sa, sb = np.asarray(a.spacing), np.asarray(b.spacing)
    if np.any(np.abs(sa - sb) > rtol * np.maximum(np.abs(sa), np.abs(sb))):
        raise AlignmentError(f"spacing differs: {a.spacing} vs {b.spacing}")
    if np.any(np.abs(a.orientation - b.orientation) > rtol):
        raise AlignmentError("orientation matrices differ")


@dataclass
class CaseRecord:
    case_id: str
    label: int
    features: Optional[dict] = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise PancradError(f"label must be 0 or 1, got {self.label!r}")
        self.label = int(self.label)
