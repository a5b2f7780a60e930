"""Neighbouring gray tone difference matrix (NGTDM) features."""
from __future__ import annotations

import numpy as np

from ..exceptions import DegenerateRoiError
from .discretize import TextureConfig, padded_neighbours
from .names import NGTDM

COARSENESS_CAP = 1e6


def ngtdm_matrix(roi, distance=1):
    """Per-level ``(n_i, s_i)``: voxel counts and summed absolute differences.

    Only in-mask voxels with at least one in-mask neighbour contribute.
    """
    levels = roi.levels
    total = np.zeros(levels.shape, dtype=np.float64)
    count = np.zeros(levels.shape, dtype=np.int64)
    for shifted in padded_neighbours(levels, distance):
        inside = shifted > 0
        total += np.where(inside, shifted, 0)
        count += inside
    valid = (levels > 0) & (count > 0)
    if not valid.any():
        raise DegenerateRoiError("no in-mask voxel has an in-mask neighbour")
    lv = levels[valid]
    diff = np.abs(lv - total[valid] / count[valid])
    n = np.bincount(lv, minlength=roi.ng + 1)[1:].astype(np.float64)
    s = np.bincount(lv, weights=diff, minlength=roi.ng + 1)[1:]
    return n, s


def ngtdm_features(roi, config=None):
    config = config or TextureConfig()
    eps = config.epsilon
    n, s = ngtdm_matrix(roi, config.ngtdm_distance)
    nvp = n.sum()
    p = n / nvp
    present = p > 0
    lv = np.arange(1, roi.ng + 1, dtype=np.float64)[present]
    pp, sp = p[present], s[present]
    ngp = lv.size

    denom = float(np.sum(pp * sp))
    coarseness = COARSENESS_CAP if denom < eps else 1.0 / denom
    dl = lv[:, None] - lv[None, :]
    pij = pp[:, None] * pp[None, :]
    if ngp > 1:
        contrast = float(np.sum(pij * dl ** 2) / (ngp * (ngp - 1)) * s.sum() / nvp)
    else:
        contrast = 0.0
    ip = lv * pp
    busy_denom = float(np.sum(np.abs(ip[:, None] - ip[None, :])))
    busyness = denom / busy_denom if busy_denom >= eps else 0.0
    ps = pp * sp
    complexity = float(np.sum(np.abs(dl) * (ps[:, None] + ps[None, :]) / (pp[:, None] + pp[None, :])) / nvp)
    s_total = float(s.sum())
    strength = float(np.sum((pp[:, None] + pp[None, :]) * dl ** 2) / s_total) if s_total >= eps else 0.0

    values = {
        "Coarseness": float(coarseness),
        "Contrast": contrast,
        "Busyness": float(busyness),
        "Complexity": complexity,
        "Strength": strength,
    }
    return {name: values[name] for name in NGTDM}
