"""Full 107-feature extraction and its scikit-learn transformer wrapper."""
from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..exceptions import EmptyMaskError, FeatureComputationError
from ..volume import Mask, check_aligned
from .discretize import TextureConfig, discretize
from .firstorder import first_order_features
from .glcm import glcm_features
from .gldm import gldm_features
from .glrlm import glrlm_features
from .glszm import glszm_features
from .names import FEATURE_NAMES
from .ngtdm import ngtdm_features
from .shape import shape_features

# first-order features that move with a global intensity offset
SHIFT_DEPENDENT = (
    "firstorder_Energy", "firstorder_TotalEnergy", "firstorder_Minimum",
    "firstorder_10thPercentile", "firstorder_90thPercentile", "firstorder_Maximum",
    "firstorder_Mean", "firstorder_Median", "firstorder_RootMeanSquared",
)


def extract_all(volume, mask, config=None, shape_mask=None):
    """Compute the canonical 107-entry feature vector.

    Intensity and texture families use ``mask``. Shape features describe
    ``shape_mask`` when given (e.g. the organ inside a box-shaped region),
    otherwise ``mask``.
    """
    config = config or TextureConfig()
    check_aligned(volume, mask)
    if not np.any(mask.voxels):
        raise EmptyMaskError("feature extraction needs a non-empty mask")
    if shape_mask is None:
        shape_mask = mask
    else:
        check_aligned(volume, shape_mask)

    roi = discretize(volume, mask, config)
    families = [
        ("firstorder", first_order_features(volume, mask, config)),
        ("shape", shape_features(shape_mask)),
        ("glcm", glcm_features(roi, config)),
        ("glrlm", glrlm_features(roi, config)),
        ("glszm", glszm_features(roi, config)),
        ("ngtdm", ngtdm_features(roi, config)),
        ("gldm", gldm_features(roi, config)),
    ]
    vector = OrderedDict()
    for family, values in families:
        for name, value in values.items():
            key = f"{family}_{name}"
            if not math.isfinite(value):
                raise FeatureComputationError(f"feature {key} evaluated to {value}")
            vector[key] = float(value)
    assert tuple(vector) == FEATURE_NAMES
    return vector


class RadiomicsExtractor(TransformerMixin, BaseEstimator):
    """Turn a sequence of cases into an ``(n_cases, 107)`` feature matrix.

    Each case is either a ``(volume, mask)`` pair or a
    :class:`~pancrad.pipeline.PreparedRoi`.
    """

    def __init__(self, bin_width=25.0, glcm_distance=1, gldm_alpha=0, ngtdm_distance=1, epsilon=2.2e-16):
        self.bin_width = bin_width
        self.glcm_distance = glcm_distance
        self.gldm_alpha = gldm_alpha
        self.ngtdm_distance = ngtdm_distance
        self.epsilon = epsilon

    def texture_config(self):
        return TextureConfig(self.bin_width, self.glcm_distance, self.gldm_alpha,
                             self.ngtdm_distance, self.epsilon)

    def fit(self, X, y=None):
        self.texture_config()
        self.n_features_out_ = len(FEATURE_NAMES)
        return self

    def _extract_one(self, case, config):
        shape_mask = getattr(case, "organ", None)
        if shape_mask is not None:
            return extract_all(case.volume, case.region, config, shape_mask=shape_mask)
        volume, mask = case
        if not isinstance(mask, Mask):
            raise TypeError("cases must be (Volume, Mask) pairs or PreparedRoi instances")
        return extract_all(volume, mask, config)

    def transform(self, X):
        config = self.texture_config()
        rows = [list(self._extract_one(case, config).values()) for case in X]
        return np.array(rows, dtype=np.float64).reshape(len(rows), len(FEATURE_NAMES))

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURE_NAMES, dtype=object)
