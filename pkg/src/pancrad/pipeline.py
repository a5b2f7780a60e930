"""Per-case preprocessing chain and its scikit-learn transformer."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .preprocess import GaussianParams, gaussian_denoise, reorient_to_canonical
from .roi import crop, expand_box, mask_bounding_box
from .volume import Mask, check_aligned


class PreparedRoi(NamedTuple):
    """Cropped ROI ready for feature extraction.

    ``region`` covers the whole expanded box and drives the intensity and
    texture features; ``organ`` is the cropped segmentation used for shape.
    """

    volume: object
    region: Mask
    organ: Mask


def prepare_case(volume, mask, gaussian=None, reorient=True, expand_fraction=0.10):
    """Reorient, denoise, and crop to the expanded mask bounding box."""
    check_aligned(volume, mask)
    if reorient:
        volume = reorient_to_canonical(volume)
        mask = reorient_to_canonical(mask)
    volume = gaussian_denoise(volume, gaussian or GaussianParams())
    box = expand_box(mask_bounding_box(mask), expand_fraction, volume.dims)
    cropped = crop(volume, box)
    organ = crop(mask, box)
    region = organ.with_voxels(np.ones(organ.dims, dtype=np.uint8))
    return PreparedRoi(cropped, region, organ)


class RoiPreparer(TransformerMixin, BaseEstimator):
    """Map ``(volume, mask)`` pairs to :class:`PreparedRoi` instances."""

    def __init__(self, sigma_mm=0.5, truncation=3.0, reorient=True, expand_fraction=0.10):
        self.sigma_mm = sigma_mm
        self.truncation = truncation
        self.reorient = reorient
        self.expand_fraction = expand_fraction

    def fit(self, X, y=None):
        GaussianParams(self.sigma_mm, self.truncation)
        return self

    def transform(self, X):
        gaussian = GaussianParams(self.sigma_mm, self.truncation)
        return [prepare_case(v, m, gaussian, self.reorient, self.expand_fraction) for v, m in X]
