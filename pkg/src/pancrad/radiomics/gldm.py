"""Gray level dependence matrix (GLDM) features."""
from __future__ import annotations

import numpy as np

from .discretize import TextureConfig, neighbour_offsets, padded_neighbours
from ._runlength import emphasis_stats
from .names import GLDM


def dependence_matrix(roi, alpha=0):
    """Counts over (level, dependence + 1); dependence counts 26-neighbours within ``alpha``."""
    levels = roi.levels
    dep = np.zeros(levels.shape, dtype=np.int64)
    for shifted in padded_neighbours(levels, 1):
        dep += (shifted > 0) & (np.abs(shifted - levels) <= alpha)
    inside = levels > 0
    mat = np.zeros((roi.ng, len(neighbour_offsets(1)) + 1), dtype=np.float64)
    np.add.at(mat, (levels[inside] - 1, dep[inside]), 1)
    return mat


def gldm_features(roi, config=None):
    config = config or TextureConfig()
    s = emphasis_stats(dependence_matrix(roi, config.gldm_alpha), config.epsilon)
    values = {
        "SmallDependenceEmphasis": s["small"],
        "LargeDependenceEmphasis": s["large"],
        "GrayLevelNonUniformity": s["gln"],
        "DependenceNonUniformity": s["sn"],
        "DependenceNonUniformityNormalized": s["snn"],
        "GrayLevelVariance": s["glv"],
        "DependenceVariance": s["sv"],
        "DependenceEntropy": s["entropy"],
        "LowGrayLevelEmphasis": s["low"],
        "HighGrayLevelEmphasis": s["high"],
        "SmallDependenceLowGrayLevelEmphasis": s["small_low"],
        "SmallDependenceHighGrayLevelEmphasis": s["small_high"],
        "LargeDependenceLowGrayLevelEmphasis": s["large_low"],
        "LargeDependenceHighGrayLevelEmphasis": s["large_high"],
    }
    return {name: values[name] for name in GLDM}
