"""Deterministic synthetic CT cases: an ellipsoidal organ, optionally wrapped in a halo.

Randomness comes from a counter-based SplitMix64 stream so that a case is a
pure function of its seed. Per-case seeds are ``hash64(master_seed, i)``::

    hash64(m, i) = splitmix64(splitmix64(m) ^ i)

where ``splitmix64(x)`` is one SplitMix64 output for state ``x``. Output
``n`` (0-based) of the stream for seed ``s`` is the finalizer applied to
``s + (n + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``; uniforms take the top 53
bits, and normals use Box-Muller on consecutive uniform pairs.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import PancradError
from .nifti import save_nifti
from .volume import CaseRecord, Mask, Volume

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x):
    return _mix((x + GOLDEN) & MASK64)


def hash64(master_seed, index):
    return splitmix64(splitmix64(master_seed & MASK64) ^ (index & MASK64))


class SplitMixStream:
    """Counter-based SplitMix64 generator with vectorized draws."""

    def __init__(self, seed):
        self.seed = seed & MASK64
        self.counter = 0

    def raw(self, n):
        with np.errstate(over="ignore"):
            k = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
            z = np.uint64(self.seed) + k * np.uint64(GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.counter += n
        return z

    def uniform(self, n, low=0.0, high=1.0):
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return low + (high - low) * u

    def normal(self, n):
        m = (n + 1) // 2
        bits = self.raw(2 * m) >> np.uint64(11)
        u1 = (bits[0::2].astype(np.float64) + 1.0) * 2.0 ** -53
        u2 = bits[1::2].astype(np.float64) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(2 * np.pi * u2)
        out[1::2] = r * np.sin(2 * np.pi * u2)
        return out[:n]


@dataclass(frozen=True)
class PhantomParams:
    grid: int = 48
    spacing_mm: float = 1.0
    semi_axis_range: tuple = (8.0, 14.0)
    base_intensity: float = 60.0
    noise_std: float = 5.0
    halo_thickness_range: tuple = (2.0, 4.0)
    halo_offset: float = -25.0
    seed: int = 0


def _ellipsoid(grid, centre, semi):
    g = np.indices((grid,) * 3, dtype=np.float64)
    r2 = sum(((g[a] - centre) / semi[a]) ** 2 for a in range(3))
    return r2 <= 1.0


def phantom_regions(params):
    """Draw the case geometry: ``(organ, shell, stream)``.

    The stream is returned positioned after the geometry draws.
    """
    stream = SplitMixStream(params.seed)
    semi = stream.uniform(3, *params.semi_axis_range)
    thickness = float(stream.uniform(1, *params.halo_thickness_range)[0])
    centre = (params.grid - 1) / 2.0
    if centre - semi.max() < 2 or centre + semi.max() > params.grid - 1 - 2:
        raise PancradError(f"organ with semi-axes {semi.round(2).tolist()} does not fit a {params.grid}^3 grid")
    organ = _ellipsoid(params.grid, centre, semi)
    shell = _ellipsoid(params.grid, centre, semi + thickness) & ~organ
    return organ, shell, stream


def generate_case(params, label, case_id="case"):
    """Build ``(Volume, Mask, CaseRecord)`` for one synthetic case."""
    if label not in (0, 1):
        raise PancradError(f"label must be 0 or 1, got {label!r}")
    organ, shell, stream = phantom_regions(params)
    n = params.grid
    noise = stream.normal(n ** 3).reshape((n,) * 3)
    sd = np.full((n,) * 3, params.noise_std)
    intensity = np.where(organ, params.base_intensity, 0.0)
    if label == 1:
        intensity[shell] = params.base_intensity + params.halo_offset
        sd[shell] *= 2
    data = intensity + sd * noise
    spacing = (params.spacing_mm,) * 3
    return Volume(data, spacing=spacing), Mask(organ, spacing=spacing), CaseRecord(case_id, label)


def generate_dataset(n_pos, n_neg, master_seed, out_dir, params=None):
    """Write ``n_pos + n_neg`` cases and ``manifest.csv`` into ``out_dir``.

    Positives come first; case ``i`` uses seed ``hash64(master_seed, i)``.
    Returns the manifest rows.
    """
    if n_pos < 1 or n_neg < 1:
        raise PancradError("need at least one positive and one negative case")
    params = params or PhantomParams()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n_pos + n_neg):
        label = 1 if i < n_pos else 0
        seed = hash64(master_seed, i)
        case_id = f"case_{i:04d}"
        volume, mask, _ = generate_case(replace(params, seed=seed), label, case_id)
        save_nifti(volume, out / f"{case_id}_img.nii", dtype=np.float32)
        save_nifti(mask, out / f"{case_id}_msk.nii", dtype=np.uint8)
        rows.append({"case_id": case_id, "label": label, "seed": seed})
    write_manifest(rows, out / "manifest.csv")
    return rows


def write_manifest(rows, path):
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["case_id", "label", "seed"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_manifest(path):
    """Rows of a ``case_id,label,seed`` manifest with image paths resolved beside it."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"case_id", "label"} <= set(reader.fieldnames):
            raise PancradError(f"{path}: manifest needs case_id and label columns")
        rows = []
        for row in reader:
            cid = row["case_id"]
            rows.append({
                "case_id": cid,
                "label": int(row["label"]),
                "image": path.parent / f"{cid}_img.nii",
                "mask": path.parent / f"{cid}_msk.nii",
            })
    return rows
