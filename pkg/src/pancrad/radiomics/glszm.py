"""Gray level size zone matrix (GLSZM) features."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .discretize import TextureConfig
from ._runlength import emphasis_stats
from .names import GLSZM

_CONNECTIVITY_26 = np.ones((3, 3, 3), dtype=bool)


def size_zone_matrix(roi):
    """Counts of 26-connected equal-level zones, shape (ng, largest zone)."""
    zones = []
    for level in range(1, roi.ng + 1):
        labelled, count = ndimage.label(roi.levels == level, structure=_CONNECTIVITY_26)
        if count:
            sizes = np.bincount(labelled.ravel())[1:]
            zones.extend((level, int(s)) for s in sizes)
    largest = max(s for _, s in zones)
    mat = np.zeros((roi.ng, largest), dtype=np.float64)
    for level, size in zones:
        mat[level - 1, size - 1] += 1
    return mat


def glszm_features(roi, config=None):
    config = config or TextureConfig()
    s = emphasis_stats(size_zone_matrix(roi), config.epsilon)
    values = {
        "SmallAreaEmphasis": s["small"],
        "LargeAreaEmphasis": s["large"],
        "GrayLevelNonUniformity": s["gln"],
        "GrayLevelNonUniformityNormalized": s["glnn"],
        "SizeZoneNonUniformity": s["sn"],
        "SizeZoneNonUniformityNormalized": s["snn"],
        "ZonePercentage": s["total"] / roi.n_voxels,
        "GrayLevelVariance": s["glv"],
        "ZoneVariance": s["sv"],
        "ZoneEntropy": s["entropy"],
        "LowGrayLevelZoneEmphasis": s["low"],
        "HighGrayLevelZoneEmphasis": s["high"],
        "SmallAreaLowGrayLevelEmphasis": s["small_low"],
        "SmallAreaHighGrayLevelEmphasis": s["small_high"],
        "LargeAreaLowGrayLevelEmphasis": s["large_low"],
        "LargeAreaHighGrayLevelEmphasis": s["large_high"],
    }
    return {name: values[name] for name in GLSZM}
