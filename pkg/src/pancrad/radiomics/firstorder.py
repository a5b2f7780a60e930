"""Intensity histogram statistics over the masked region."""
from __future__ import annotations

import numpy as np

from ..exceptions import EmptyMaskError
from ..volume import check_aligned
from .discretize import TextureConfig, bin_levels
from .names import FIRSTORDER


def first_order_features(volume, mask, config=None):
    """The 18 first-order features.

    Variance is the population variance and Kurtosis the non-excess fourth
    standardized moment. Skewness and Kurtosis are 0 when the region has no
    spread. Entropy and Uniformity use the fixed-bin-width histogram.
    """
    config = config or TextureConfig()
    check_aligned(volume, mask)
    inside = np.asarray(mask.voxels) > 0
    if not inside.any():
        raise EmptyMaskError("first-order features need a non-empty mask")
    x = np.asarray(volume.voxels, dtype=np.float64)[inside]
    eps = config.epsilon
    n = x.size

    levels = bin_levels(x, config.bin_width, x.min())
    p = np.bincount(levels)[1:] / n
    p = p[p > 0]

    spread = x.max() > x.min()
    mean = x.mean() if spread else x[0]
    dev = x - mean
    m2 = np.mean(dev ** 2)
    m3 = np.mean(dev ** 3)
    m4 = np.mean(dev ** 4)
    p10, p25, p50, p75, p90 = np.percentile(x, [10, 25, 50, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    # tiny regions can leave nothing strictly inside the inner band
    robust_mad = float(np.mean(np.abs(robust - robust.mean()))) if robust.size else 0.0
    energy = float(np.sum(x ** 2))

    values = {
        "Energy": energy,
        "TotalEnergy": energy * float(np.prod(volume.spacing)),
        "Entropy": float(-np.sum(p * np.log2(p + eps))),
        "Minimum": float(x.min()),
        "10thPercentile": float(p10),
        "90thPercentile": float(p90),
        "Maximum": float(x.max()),
        "Mean": float(mean),
        "Median": float(p50),
        "InterquartileRange": float(p75 - p25),
        "Range": float(x.max() - x.min()),
        "MeanAbsoluteDeviation": float(np.mean(np.abs(dev))),
        "RobustMeanAbsoluteDeviation": robust_mad,
        "RootMeanSquared": float(np.sqrt(energy / n)),
        "Skewness": float(m3 / m2 ** 1.5) if spread else 0.0,
        "Kurtosis": float(m4 / m2 ** 2) if spread else 0.0,
        "Variance": float(m2),
        "Uniformity": float(np.sum(p ** 2)),
    }
    return {name: values[name] for name in FIRSTORDER}
