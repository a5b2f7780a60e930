"""Emphasis statistics shared by the run, zone and dependence matrices."""
from __future__ import annotations

import numpy as np


def emphasis_stats(counts, eps, sizes=None):
    """Features of a (gray level x size) count matrix.

    ``sizes`` gives the size value of each column (defaults to 1..n).
    Keys use generic names; each family renames them.
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    ng, ns = counts.shape
    i = np.arange(1, ng + 1, dtype=np.float64)[:, None]
    j = (np.arange(1, ns + 1, dtype=np.float64) if sizes is None else np.asarray(sizes, dtype=np.float64))[None, :]
    p = counts / total
    by_level = counts.sum(axis=1)
    by_size = counts.sum(axis=0)
    mu_i = np.sum(p * i)
    mu_j = np.sum(p * j)
    return {
        "small": float(np.sum(counts / j ** 2) / total),
        "large": float(np.sum(counts * j ** 2) / total),
        "gln": float(np.sum(by_level ** 2) / total),
        "glnn": float(np.sum(by_level ** 2) / total ** 2),
        "sn": float(np.sum(by_size ** 2) / total),
        "snn": float(np.sum(by_size ** 2) / total ** 2),
        "glv": float(np.sum(p * (i - mu_i) ** 2)),
        "sv": float(np.sum(p * (j - mu_j) ** 2)),
        "entropy": float(-np.sum(p * np.log2(p + eps))),
        "low": float(np.sum(counts / i ** 2) / total),
        "high": float(np.sum(counts * i ** 2) / total),
        "small_low": float(np.sum(counts / (i ** 2 * j ** 2)) / total),
        "small_high": float(np.sum(counts * i ** 2 / j ** 2) / total),
        "large_low": float(np.sum(counts * j ** 2 / i ** 2) / total),
        "large_high": float(np.sum(counts * i ** 2 * j ** 2) / total),
        "total": float(total),
    }
