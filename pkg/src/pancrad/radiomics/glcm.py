"""Gray level co-occurrence matrix (GLCM) features."""
from __future__ import annotations

import numpy as np

from ..exceptions import DegenerateRoiError
from .discretize import TextureConfig, pair_views, unique_directions
from .names import GLCM

# eigen/entropy differences below this are rounding noise; square roots would amplify them
ZERO_SNAP = 1e-12


def glcm_matrices(roi, distance=1, directions=None):
    """Normalized symmetric co-occurrence matrices, one per non-empty direction."""
    ng = roi.ng
    directions = directions if directions is not None else unique_directions(distance)
    mats = []
    for offset in directions:
        views = pair_views(roi.levels, offset)
        if views is None:
            continue
        a, b = views
        valid = (a > 0) & (b > 0)
        if not valid.any():
            continue
        codes = (a[valid] - 1) * ng + (b[valid] - 1)
        counts = np.bincount(codes, minlength=ng * ng).reshape(ng, ng).astype(np.float64)
        counts = counts + counts.T
        mats.append(counts / counts.sum())
    if not mats:
        raise DegenerateRoiError("no in-mask voxel pair exists in any direction")
    return mats


def _entropy(p, eps):
    return float(-np.sum(p * np.log2(p + eps)))


def _mcc(p, px):
    present = px > 0
    if present.sum() < 2:
        return 1.0
    q = p[np.ix_(present, present)]
    scale = 1.0 / np.sqrt(px[present])
    # symmetric similarity transform of Q = D^-1 P D^-1 P: eig(Q) = eig(M)^2
    m = scale[:, None] * q * scale[None, :]
    mu = np.sort(np.abs(np.linalg.eigvalsh(m)))[::-1]
    second = mu[1] ** 2
    return float(np.sqrt(second)) if second >= ZERO_SNAP else 0.0


def glcm_matrix_features(p, ng, eps):
    """All 24 features of one normalized symmetric matrix."""
    levels = np.arange(1, ng + 1, dtype=np.float64)
    i, j = np.meshgrid(levels, levels, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    ux = float(np.sum(p * i))
    uy = float(np.sum(p * j))
    sigx = np.sqrt(np.sum(p * (i - ux) ** 2))
    sigy = np.sqrt(np.sum(p * (j - uy) ** 2))
    diff = np.abs(i - j)
    k_sum = np.arange(2, 2 * ng + 1)
    k_diff = np.arange(0, ng)
    p_sum = np.array([p[(i + j) == k].sum() for k in k_sum])
    p_diff = np.array([p[diff == k].sum() for k in k_diff])

    hx = _entropy(px, eps)
    hy = _entropy(py, eps)
    hxy = _entropy(p, eps)
    pxpy = px[:, None] * py[None, :]
    hxy1 = float(-np.sum(p * np.log2(pxpy + eps)))
    hxy2 = float(-np.sum(pxpy * np.log2(pxpy + eps)))

    diff_avg = float(np.sum(k_diff * p_diff))
    centred = i + j - ux - uy
    if sigx * sigy > 0:
        correlation = float(np.sum(p * (i - ux) * (j - uy)) / (sigx * sigy))
    else:
        correlation = 1.0
    hmax = max(hx, hy)
    imc1 = (hxy - hxy1) / hmax if hmax > 0 else 0.0
    gap = hxy2 - hxy
    imc2 = float(np.sqrt(1 - np.exp(-2 * gap))) if gap >= ZERO_SNAP else 0.0
    off = diff > 0

    return {
        "Autocorrelation": float(np.sum(p * i * j)),
        "JointAverage": ux,
        "ClusterProminence": float(np.sum(p * centred ** 4)),
        "ClusterShade": float(np.sum(p * centred ** 3)),
        "ClusterTendency": float(np.sum(p * centred ** 2)),
        "Contrast": float(np.sum(p * diff ** 2)),
        "Correlation": correlation,
        "DifferenceAverage": diff_avg,
        "DifferenceEntropy": _entropy(p_diff, eps),
        "DifferenceVariance": float(np.sum(p_diff * (k_diff - diff_avg) ** 2)),
        "JointEnergy": float(np.sum(p ** 2)),
        "JointEntropy": hxy,
        "Imc1": float(imc1),
        "Imc2": imc2,
        "Idm": float(np.sum(p / (1 + diff ** 2))),
        "Idmn": float(np.sum(p / (1 + diff ** 2 / ng ** 2))),
        "Id": float(np.sum(p / (1 + diff))),
        "Idn": float(np.sum(p / (1 + diff / ng))),
        "InverseVariance": float(np.sum(p[off] / diff[off] ** 2)),
        "MaximumProbability": float(p.max()),
        "SumAverage": float(np.sum(k_sum * p_sum)),
        "SumEntropy": _entropy(p_sum, eps),
        "SumSquares": float(np.sum(p * (i - ux) ** 2)),
        "Mcc": _mcc(p, px),
    }


def glcm_features(roi, config=None, directions=None):
    """Direction-averaged GLCM features.

    Directions with no in-mask pair are dropped before averaging. With a
    single gray level, Correlation is 1 and Imc1/Imc2 are 0.
    """
    config = config or TextureConfig()
    mats = glcm_matrices(roi, config.glcm_distance, directions)
    per_dir = [glcm_matrix_features(p, roi.ng, config.epsilon) for p in mats]
    return {name: float(np.mean([d[name] for d in per_dir])) for name in GLCM}
