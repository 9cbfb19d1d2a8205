"""Deterministic synthetic day/night composites for tests and demos."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from srx.imaging import resize_bilinear, save_image


def synthetic_pair(index: int, hr_size: int = 256, seed: int = 0, day_side: str = "left") -> np.ndarray:
    """One ``hr_size x 2*hr_size`` RGB composite.

    The day half is a smooth random colour field; the night half is a
    darkened, blue-shifted copy with sensor noise and a few bright lights.
    """
    rng = np.random.default_rng([seed, index])
    coarse = rng.uniform(0.15, 0.95, size=(4, 4, 3))
    day = resize_bilinear(coarse, hr_size, hr_size)
    yy, xx = np.mgrid[0:hr_size, 0:hr_size] / max(hr_size - 1, 1)
    day = np.clip(day * (0.8 + 0.2 * yy[..., None]) + 0.05 * np.sin(6.0 * xx)[..., None], 0.0, 1.0)

    night = day * np.array([0.20, 0.22, 0.35]) + rng.normal(0.0, 0.02, size=day.shape)
    for _ in range(3):
        cy, cx = rng.integers(0, hr_size, size=2)
        r2 = (np.arange(hr_size)[:, None] - cy) ** 2 + (np.arange(hr_size)[None, :] - cx) ** 2
        glow = np.exp(-r2 / (2.0 * (0.03 * hr_size + 1.0) ** 2))
        night = night + 0.8 * glow[..., None] * np.array([1.0, 0.85, 0.5])
    night = np.clip(night, 0.0, 1.0)
    halves = (day, night) if day_side == "left" else (night, day)
    return np.concatenate(halves, axis=1)


def write_synthetic_pairs(out_dir: str | os.PathLike, n: int, hr_size: int = 256, seed: int = 0,
                          day_side: str = "left") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        path = out_dir / f"pair_{i:05d}.png"
        save_image(synthetic_pair(i, hr_size, seed, day_side), path)
        paths.append(path)
    return paths
