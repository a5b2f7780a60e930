"""Gray level run length matrix (GLRLM) features."""
from __future__ import annotations

import numpy as np

from .discretize import TextureConfig, unique_directions
from ._runlength import emphasis_stats
from .names import GLRLM


def _shift_equal(levels, offset):
    """Boolean grid: voxel is in-mask and its predecessor at ``-offset`` has the same level."""
    out = np.zeros(levels.shape, dtype=bool)
    src, dst = [], []
    for delta, n in zip(offset, levels.shape):
        if abs(delta) >= n:
            return out
        if delta >= 0:
            src.append(slice(0, n - delta))
            dst.append(slice(delta, n))
        else:
            src.append(slice(-delta, n))
            dst.append(slice(0, n + delta))
    prev, cur = levels[tuple(src)], levels[tuple(dst)]
    out[tuple(dst)] = (cur > 0) & (cur == prev)
    return out


def run_length_matrix(roi, offset):
    """Counts of maximal equal-level runs along ``offset``: shape (ng, longest run)."""
    levels = roi.levels
    cont = _shift_equal(levels, offset)
    starts = np.argwhere((levels > 0) & ~cont)
    step = np.asarray(offset)
    shape = np.asarray(levels.shape)
    lengths = np.ones(len(starts), dtype=np.int64)
    pos = starts.copy()
    active = np.arange(len(starts))
    while active.size:
        nxt = pos[active] + step
        inside = np.all((nxt >= 0) & (nxt < shape), axis=1)
        go = np.zeros(active.size, dtype=bool)
        go[inside] = cont[tuple(nxt[inside].T)]
        active = active[go]
        pos[active] = nxt[go]
        lengths[active] += 1
    run_levels = levels[tuple(starts.T)]
    mat = np.zeros((roi.ng, int(lengths.max())), dtype=np.float64)
    np.add.at(mat, (run_levels - 1, lengths - 1), 1)
    return mat


def glrlm_matrices(roi, directions=None):
    directions = directions if directions is not None else unique_directions(1)
    return [run_length_matrix(roi, d) for d in directions]


def glrlm_matrix_features(mat, n_voxels, eps):
    s = emphasis_stats(mat, eps)
    return {
        "ShortRunEmphasis": s["small"],
        "LongRunEmphasis": s["large"],
        "GrayLevelNonUniformity": s["gln"],
        "GrayLevelNonUniformityNormalized": s["glnn"],
        "RunLengthNonUniformity": s["sn"],
        "RunLengthNonUniformityNormalized": s["snn"],
        "RunPercentage": s["total"] / n_voxels,
        "GrayLevelVariance": s["glv"],
        "RunVariance": s["sv"],
        "RunEntropy": s["entropy"],
        "LowGrayLevelRunEmphasis": s["low"],
        "HighGrayLevelRunEmphasis": s["high"],
        "ShortRunLowGrayLevelEmphasis": s["small_low"],
        "ShortRunHighGrayLevelEmphasis": s["small_high"],
        "LongRunLowGrayLevelEmphasis": s["large_low"],
        "LongRunHighGrayLevelEmphasis": s["large_high"],
    }


def glrlm_features(roi, config=None, directions=None):
    """Run-length features averaged over the 13 directions (or ``directions``)."""
    config = config or TextureConfig()
    n = roi.n_voxels
    per_dir = [glrlm_matrix_features(m, n, config.epsilon) for m in glrlm_matrices(roi, directions)]
    return {name: float(np.mean([d[name] for d in per_dir])) for name in GLRLM}
