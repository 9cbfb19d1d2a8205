"""Full-reference metrics for one candidate/reference image pair.

RMSE, MAE and NCC pool every pixel of every channel into one population.
SSIM is computed per channel over valid window positions and the channel
means are averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from srx.errors import DegenerateInput, ShapeMismatch, TooSmall
from srx.imaging import check_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_RANGE = 1.0


class Direction(str, Enum):
    LOWER = "lower-better"
    HIGHER = "higher-better"

    @property
    def arrow(self) -> str:
        return "↓" if self is Direction.LOWER else "↑"


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    direction: Direction

    def __float__(self) -> float:
        return self.value


METRIC_NAMES = ("RMSE", "MAE", "SSIM", "NCC")

DIRECTIONS = {
    "RMSE": Direction.LOWER,
    "MAE": Direction.LOWER,
    "SSIM": Direction.HIGHER,
    "NCC": Direction.HIGHER,
    "FID": Direction.LOWER,
}


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = check_image(a)
    b = check_image(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    # reductions must not depend on the caller's memory layout
    return np.ascontiguousarray(a), np.ascontiguousarray(b)


def rmse(a: np.ndarray, b: np.ndarray) -> MetricValue:
    a, b = _pair(a, b)
    value = float(np.sqrt(np.mean((a - b) ** 2)))
    return MetricValue("RMSE", value, Direction.LOWER)


def mae(a: np.ndarray, b: np.ndarray) -> MetricValue:
    a, b = _pair(a, b)
    value = float(np.mean(np.abs(a - b)))
    return MetricValue("MAE", value, Direction.LOWER)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps centred on the middle sample."""
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # separable correlation restricted to windows fully inside the image
    k = taps.size
    rows = sliding_window_view(x, k, axis=0) @ taps
    return sliding_window_view(rows, k, axis=1) @ taps


def ssim(a: np.ndarray, b: np.ndarray) -> MetricValue:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Raises:
        ShapeMismatch: if the images differ in shape.
        TooSmall: if either spatial dimension is below the window size.
    """
    a, b = _pair(a, b)
    h, w, channels = a.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise TooSmall(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}")
    taps = gaussian_window()
    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_RANGE) ** 2
    per_channel = []
    for c in range(channels):
        x = np.ascontiguousarray(a[:, :, c])
        y = np.ascontiguousarray(b[:, :, c])
        mu_x = _filter_valid(x, taps)
        mu_y = _filter_valid(y, taps)
        var_x = _filter_valid(x * x, taps) - mu_x**2
        var_y = _filter_valid(y * y, taps) - mu_y**2
        cov = _filter_valid(x * y, taps) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        per_channel.append(np.mean(num / den))
    value = float(np.clip(np.mean(per_channel), -1.0, 1.0))
    return MetricValue("SSIM", value, Direction.HIGHER)


def ncc(a: np.ndarray, b: np.ndarray) -> MetricValue:
    """Global zero-mean normalized cross-correlation over all channels.

    Raises:
        DegenerateInput: if either image has zero variance.
    """
    a, b = _pair(a, b)
    # a computed mean of a constant need not equal the constant exactly
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        raise DegenerateInput("NCC undefined for a zero-variance image")
    da = (a - a.mean()).ravel()
    db = (b - b.mean()).ravel()
    saa = float(da @ da)
    sbb = float(db @ db)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateInput("NCC undefined: variance underflows to zero")
    value = float(da @ db) / (np.sqrt(saa) * np.sqrt(sbb))
    return MetricValue("NCC", float(np.clip(value, -1.0, 1.0)), Direction.HIGHER)


METRICS = {"RMSE": rmse, "MAE": mae, "SSIM": ssim, "NCC": ncc}
