"""Radiomics feature families over a masked 3D region."""
from .discretize import DiscretizedRoi, TextureConfig, discretize
from .extractor import SHIFT_DEPENDENT, RadiomicsExtractor, extract_all
from .firstorder import first_order_features
from .glcm import glcm_features, glcm_matrices
from .gldm import dependence_matrix, gldm_features
from .glrlm import glrlm_features, glrlm_matrices, run_length_matrix
from .glszm import glszm_features, size_zone_matrix
from .names import FAMILIES, FEATURE_NAMES
from .ngtdm import ngtdm_features, ngtdm_matrix
from .shape import shape_features

__all__ = [
    "DiscretizedRoi", "TextureConfig", "discretize", "SHIFT_DEPENDENT", "RadiomicsExtractor",
    "extract_all", "first_order_features", "glcm_features", "glcm_matrices",
    "dependence_matrix", "gldm_features", "glrlm_features", "glrlm_matrices",
    "run_length_matrix", "glszm_features", "size_zone_matrix", "FAMILIES", "FEATURE_NAMES",
    "ngtdm_features", "ngtdm_matrix", "shape_features",
]
