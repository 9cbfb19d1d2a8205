"""Benchmark harness for joint image translation and super-resolution.

Two-stage pipelines (SR-first ``M1`` and translation-first ``M2``) run over
external model stages; every evaluation phase is scored with RMSE, MAE,
SSIM, NCC and a Frechet distance over image features.
"""

from srx.errors import SrxError, StageError, ValidationError
from srx.imaging import load_image, resize_bilinear, resize_nearest, save_image, split_pair
from srx.metrics import mae, ncc, rmse, ssim
from srx.fid import FeatureSet, GaussianStats, builtin_features, feature_stats, frechet_distance, matrix_sqrt_psd

__version__ = "0.1.0"

__all__ = [
    "FeatureSet",
    "GaussianStats",
    "SrxError",
    "StageError",
    "ValidationError",
    "builtin_features",
    "feature_stats",
    "frechet_distance",
    "load_image",
    "mae",
    "matrix_sqrt_psd",
    "ncc",
    "resize_bilinear",
    "resize_nearest",
    "rmse",
    "save_image",
    "split_pair",
    "ssim",
]
