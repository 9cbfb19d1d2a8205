"""Image I/O, pair splitting and the two resize kernels.

An image is a ``float64`` array of shape ``(H, W, C)`` with ``C`` in
``{1, 3}`` and intensities in ``[0, 1]``. Both kernels use the half-pixel
centre convention: output pixel ``y`` samples source coordinate
``(y + 0.5) * h / out_h - 0.5``.
"""

from __future__ import annotations

import os
import struct

import numpy as np
from PIL import Image as PILImage

from srx.errors import OddWidth, UnsupportedFormat, ValidationError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# IHDR colour types accepted: 0 = grayscale, 2 = truecolour.
_COLOR_CHANNELS = {0: 1, 2: 3}


def check_image(img: np.ndarray) -> np.ndarray:
    """Validate an image array and return it as ``float64`` ``(H, W, C)``.

    A 2-D array is treated as single-channel.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValidationError(f"expected (H, W, 1|3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"image must be at least 1x1, got {arr.shape[:2]}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("image intensities must lie in [0, 1]")
    return arr


def _png_header(path: str | os.PathLike) -> tuple[int, int]:
    with open(path, "rb") as fh:
        head = fh.read(33)
    if len(head) < 33 or head[:8] != PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise UnsupportedFormat(f"{path}: not a PNG file")
    bit_depth, color_type = struct.unpack(">BB", head[24:26])
    return bit_depth, color_type


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Load an 8-bit grayscale or RGB PNG as a unit-interval image.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        UnsupportedFormat: for non-PNG files, bit depths other than 8,
            palette images and any alpha channel or transparency key.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    bit_depth, color_type = _png_header(path)
    if bit_depth != 8:
        raise UnsupportedFormat(f"{path}: bit depth {bit_depth}, only 8-bit PNGs are supported")
    if color_type not in _COLOR_CHANNELS:
        raise UnsupportedFormat(f"{path}: PNG colour type {color_type} (palette or alpha) is not supported")
    with PILImage.open(path) as pil:
        if "transparency" in pil.info:
            raise UnsupportedFormat(f"{path}: transparency key present")
        raw = np.asarray(pil, dtype=np.uint8)
    if raw.ndim == 2:
        raw = raw[:, :, None]
    return raw.astype(np.float64) / 255.0


def quantize(img: np.ndarray) -> np.ndarray:
    """Map intensities to bytes with round-half-up: ``floor(i * 255 + 0.5)``."""
    q = np.floor(np.asarray(img, dtype=np.float64) * 255.0 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def save_image(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write ``img`` as an 8-bit PNG (grayscale for one channel, else RGB)."""
    arr = check_image(img)
    data = quantize(arr)
    if data.shape[2] == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    pil.save(path, format="PNG")


def split_pair(pair: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a side-by-side composite into its left and right halves."""
    arr = np.asarray(pair)
    width = arr.shape[1]
    if width % 2:
        raise OddWidth(f"cannot split image of odd width {width}")
    half = width // 2
    return arr[:, :half].copy(), arr[:, half:].copy()


def _bilinear_axis(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coord = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    coord = np.clip(coord, 0.0, n_in - 1)
    lo = np.floor(coord).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, coord - lo


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize without an anti-alias prefilter.

    Source coordinates are clamped to the image bounds before the four
    neighbours are blended, so border pixels replicate outward.
    """
    if out_h < 1 or out_w < 1:
        raise ValidationError(f"output size must be positive, got {out_h}x{out_w}")
    arr = check_image(img)
    h, w = arr.shape[:2]
    y0, y1, fy = _bilinear_axis(h, out_h)
    x0, x1, fx = _bilinear_axis(w, out_w)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    # lerp form keeps constant regions exactly constant
    top = arr[y0][:, x0] + (arr[y0][:, x1] - arr[y0][:, x0]) * fx
    bottom = arr[y1][:, x0] + (arr[y1][:, x1] - arr[y1][:, x0]) * fx
    out = top + (bottom - top) * fy
    # rounding must not leave the per-channel input range
    return np.clip(out, arr.min(axis=(0, 1)), arr.max(axis=(0, 1)))


def _nearest_axis(n_in: int, n_out: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out) + 0.5) * (n_in / n_out)).astype(np.intp)
    return np.clip(idx, 0, n_in - 1)


def resize_nearest(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbour resize; integer zoom factors replicate pixel blocks."""
    if out_h < 1 or out_w < 1:
        raise ValidationError(f"output size must be positive, got {out_h}x{out_w}")
    arr = check_image(img)
    h, w = arr.shape[:2]
    return np.ascontiguousarray(arr[_nearest_axis(h, out_h)][:, _nearest_axis(w, out_w)])


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luma with ITU-R BT.601 weights; single-channel images pass through."""
    arr = check_image(img)
    if arr.shape[2] == 1:
        return arr
    weights = np.array([0.299, 0.587, 0.114])
    return np.clip(arr @ weights, 0.0, 1.0)[:, :, None]
