"""3D shape descriptors from a marching-cubes surface and voxel PCA."""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist
from skimage.measure import marching_cubes

from ..exceptions import EmptyMaskError
from ..roi import crop, mask_bounding_box
from .names import SHAPE


def surface_mesh(mask):
    """Triangle mesh of the foreground boundary at iso-level 0.5, in mm.

    Vertex coordinates are relative to the mask's first voxel centre.
    """
    fg = np.pad((np.asarray(mask.voxels) > 0).astype(np.float64), 1)
    verts, faces, _, _ = marching_cubes(fg, level=0.5, spacing=tuple(mask.spacing))
    return verts - np.asarray(mask.spacing), faces


def mesh_volume_area(verts, faces):
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    volume = abs(np.einsum("ij,ij->i", a, np.cross(b, c)).sum()) / 6.0
    area = np.linalg.norm(np.cross(b - a, c - a), axis=1).sum() / 2.0
    return float(volume), float(area)


def _max_distance(points):
    if len(points) < 2:
        return 0.0
    if len(points) > 64 and points.shape[1] in (2, 3):
        try:
            points = points[ConvexHull(points).vertices]
        except Exception:  # degenerate (flat) point sets have no hull
            pass
    return float(pdist(points).max())


def _max_planar_distance(verts, axis, step):
    keys = np.round(verts[:, axis] / step * 2).astype(np.int64)
    keep = [a for a in range(3) if a != axis]
    best = 0.0
    for key in np.unique(keys):
        best = max(best, _max_distance(verts[keys == key][:, keep]))
    return best


def principal_lengths(mask):
    """Eigenvalues (descending) of the population covariance of voxel centres in mm."""
    idx = np.argwhere(np.asarray(mask.voxels) > 0).astype(np.float64)
    coords = idx * np.asarray(mask.spacing)
    coords -= coords.mean(axis=0)
    cov = coords.T @ coords / len(coords)
    eig = np.sort(np.linalg.eigvalsh(cov))[::-1]
    return np.clip(eig, 0.0, None)


def shape_features(mask):
    """The 14 shape features of the mask foreground."""
    if not np.any(mask.voxels):
        raise EmptyMaskError("shape features need a non-empty mask")
    mask = crop(mask, mask_bounding_box(mask))
    verts, faces = surface_mesh(mask)
    mesh_vol, area = mesh_volume_area(verts, faces)
    voxel_vol = float(mask.count * np.prod(mask.spacing))

    major, minor, least = principal_lengths(mask)
    if major > 0:
        elongation = float(np.sqrt(minor / major))
        flatness = float(np.sqrt(least / major))
    else:
        elongation = flatness = 1.0

    values = {
        "MeshVolume": mesh_vol,
        "VoxelVolume": voxel_vol,
        "SurfaceArea": area,
        "SurfaceVolumeRatio": area / mesh_vol,
        "Sphericity": float((36 * np.pi * mesh_vol ** 2) ** (1 / 3) / area),
        "MajorAxisLength": float(4 * np.sqrt(major)),
        "MinorAxisLength": float(4 * np.sqrt(minor)),
        "LeastAxisLength": float(4 * np.sqrt(least)),
        "Elongation": elongation,
        "Flatness": flatness,
        "Maximum3DDiameter": _max_distance(verts),
        "Maximum2DDiameterSlice": _max_planar_distance(verts, 2, mask.spacing[2]),
        "Maximum2DDiameterColumn": _max_planar_distance(verts, 1, mask.spacing[1]),
        "Maximum2DDiameterRow": _max_planar_distance(verts, 0, mask.spacing[0]),
    }
    return {name: values[name] for name in SHAPE}
