"""Frechet distance between Gaussian fits of two feature populations.

The trace term uses the symmetric sandwich form
``Tr sqrt(S_p^{1/2} S_q S_p^{1/2})``, which equals ``Tr sqrt(S_p S_q)``
but only ever takes square roots of symmetric PSD matrices, so the result
is always real.

Feature files
-------------
Binary, little-endian::

    b"SRXF" | u32 version (=1) | u32 n | u32 d | n*d float32, row-major

Files ending in ``.csv`` are read as headerless comma-separated rows of
``d`` float64 values instead.
"""

from __future__ import annotations

import logging
import os
import struct
from dataclasses import dataclass

import numpy as np

from srx.errors import (
    BadMagic,
    DimensionMismatch,
    IndefiniteMatrix,
    NonFiniteValue,
    NotSymmetric,
    TooFewSamples,
    TruncatedFile,
    ValidationError,
)
from srx.imaging import check_image, resize_bilinear, to_gray

log = logging.getLogger(__name__)

FEATURE_MAGIC = b"SRXF"
FEATURE_VERSION = 1
_HEADER = struct.Struct("<4sIII")

SYMMETRY_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-8
REGULARIZE_BELOW = 1e-10
REGULARIZE_EPS = 1e-6
CLAMP_WARN = 1e-6

BUILTIN_SIDE = 16
BUILTIN_CELLS = 4
BUILTIN_DIM = 64


@dataclass(frozen=True)
class FeatureSet:
    """``n x d`` matrix of feature vectors, one row per image."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ValidationError(f"feature rows must be a non-empty n x d matrix, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise NonFiniteValue("feature set contains non-finite values")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"mean of length {mean.size} does not fit covariance {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def d(self) -> int:
        return self.mean.size


def feature_stats(fs: FeatureSet) -> GaussianStats:
    """Column means and the unbiased (n - 1) sample covariance, symmetrized."""
    if fs.n < 2:
        raise TooFewSamples(f"covariance needs at least 2 samples, got {fs.n}")
    mean = fs.rows.mean(axis=0)
    centered = fs.rows - mean
    cov = centered.T @ centered / (fs.n - 1)
    return GaussianStats(mean, (cov + cov.T) / 2.0)


def _check_symmetric(m: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric positive semi-definite matrix.

    Computed from the eigendecomposition ``m = Q diag(w) Q^T`` as
    ``Q diag(sqrt(max(w, 0))) Q^T``. Eigenvalues down to ``-1e-8`` (scaled
    by the spectral radius when it exceeds one) are treated as rounding
    noise and zeroed.

    Raises:
        NotSymmetric: if ``m`` is not symmetric.
        IndefiniteMatrix: if an eigenvalue is more negative than the
            tolerance.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    _check_symmetric(m)
    w, q = np.linalg.eigh((m + m.T) / 2.0)
    radius = max(1.0, float(np.max(np.abs(w))))
    if w.min() < -NEGATIVE_EIG_TOL * radius:
        raise IndefiniteMatrix(f"matrix has eigenvalue {w.min():.3e} below tolerance")
    root = (q * np.sqrt(np.maximum(w, 0.0))) @ q.T
    return (root + root.T) / 2.0


def _regularized(cov: np.ndarray) -> np.ndarray:
    if np.linalg.eigvalsh(cov).min() < REGULARIZE_BELOW:
        return cov + REGULARIZE_EPS * np.eye(cov.shape[0])
    return cov


def frechet_distance(p: GaussianStats, q: GaussianStats) -> float:
    """Squared Frechet distance between two Gaussians.

    ``|mu_p - mu_q|^2 + Tr(S_p + S_q - 2 (S_p S_q)^{1/2})``. A covariance
    whose smallest eigenvalue is below ``1e-10`` gets ``1e-6`` added to its
    diagonal before use; small negative results from rounding clamp to 0.
    """
    if p.d != q.d:
        raise DimensionMismatch(f"feature dimensions differ: {p.d} vs {q.d}")
    cov_p = _regularized(p.cov)
    cov_q = _regularized(q.cov)
    diff = p.mean - q.mean
    root_p = matrix_sqrt_psd(cov_p)
    sandwich = root_p @ cov_q @ root_p
    cross = np.trace(matrix_sqrt_psd((sandwich + sandwich.T) / 2.0))
    value = float(diff @ diff + np.trace(cov_p) + np.trace(cov_q) - 2.0 * cross)
    if value < 0.0:
        if value < -CLAMP_WARN:
            log.warning("Frechet distance %.3e clamped to 0", value)
        value = 0.0
    return value


def fid_from_features(candidates: FeatureSet, references: FeatureSet) -> float:
    return frechet_distance(feature_stats(candidates), feature_stats(references))


def write_features(fs: FeatureSet, path: str | os.PathLike) -> None:
    """Write ``fs`` to ``path``; ``.csv`` paths get CSV, anything else binary."""
    if str(path).lower().endswith(".csv"):
        np.savetxt(path, fs.rows, delimiter=",", fmt="%.17g")
        return
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, fs.n, fs.d))
        fh.write(fs.rows.astype("<f4").tobytes())


def _read_csv(path) -> FeatureSet:
    try:
        rows = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed feature CSV: {exc}") from exc
    if not np.all(np.isfinite(rows)):
        raise NonFiniteValue(f"{path}: non-finite feature value")
    return FeatureSet(rows)


def read_features(path: str | os.PathLike) -> FeatureSet:
    """Read a feature file written by :func:`write_features` (or a CSV).

    Raises:
        BadMagic: if the binary header does not start with ``SRXF`` or
            declares an unknown version.
        TruncatedFile: if fewer than ``n * d`` values follow the header.
        NonFiniteValue: if any value is NaN or infinite.
    """
    if str(path).lower().endswith(".csv"):
        return _read_csv(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != FEATURE_MAGIC:
        raise BadMagic(f"{path}: missing SRXF magic")
    if len(blob) < _HEADER.size:
        raise TruncatedFile(f"{path}: header truncated")
    _, version, n, d = _HEADER.unpack_from(blob)
    if version != FEATURE_VERSION:
        raise BadMagic(f"{path}: unsupported feature file version {version}")
    expected = n * d * 4
    payload = blob[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedFile(f"{path}: expected {n}x{d} values, found {len(payload) // 4}")
    rows = np.frombuffer(payload, dtype="<f4", count=n * d).reshape(n, d)
    if not np.all(np.isfinite(rows)):
        raise NonFiniteValue(f"{path}: non-finite feature value")
    return FeatureSet(rows.astype(np.float64))


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; ``C @ x`` transforms a length-``n`` signal."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    c[0] /= np.sqrt(2.0)
    return c


def builtin_features(img: np.ndarray) -> np.ndarray:
    """Deterministic 64-d descriptor standing in for an Inception network.

    1. Convert to BT.601 luma and bilinearly resize to 16x16.
    2. Split into a 4x4 grid of 4x4-pixel cells; take each cell's mean
       (16 values, row-major cell order), then each cell's population
       standard deviation (16 values).
    3. Take the orthonormal 2-D DCT-II of the 16x16 image, flatten the
       absolute coefficients row-major and keep the first 32.

    The result is ``[means, stds, dct]`` as a float64 vector.
    """
    gray = resize_bilinear(to_gray(check_image(img)), BUILTIN_SIDE, BUILTIN_SIDE)[:, :, 0]
    step = BUILTIN_SIDE // BUILTIN_CELLS
    cells = gray.reshape(BUILTIN_CELLS, step, BUILTIN_CELLS, step).swapaxes(1, 2).reshape(BUILTIN_CELLS**2, -1)
    c = dct_matrix(BUILTIN_SIDE)
    spectrum = np.abs(c @ gray @ c.T).ravel()
    return np.concatenate([cells.mean(axis=1), cells.std(axis=1), spectrum[: BUILTIN_DIM - 2 * BUILTIN_CELLS**2]])
