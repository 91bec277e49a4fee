"""Procedural test scenes: piecewise-smooth images with soft edges.

Used wherever the suite needs "natural" content (estimator accuracy,
adaptation statistics, training patches). Scenes combine a global gradient,
a handful of blurred shapes and a faint texture, then clamp into a value
range that keeps noise clamping mild.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .image import Image


def synthetic_scene(
    rng: np.random.Generator,
    height: int,
    width: int,
    channels: int = 3,
    value_range: tuple[float, float] = (0.15, 0.85),
    blur: float = 2.2,
    texture: float = 0.015,
) -> Image:
    lo, hi = value_range
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    yy /= max(height - 1, 1)
    xx /= max(width - 1, 1)
    chans = []
    base_angle = rng.uniform(0, 2 * np.pi)
    for _ in range(channels):
        angle = base_angle + rng.normal(0, 0.3)
        field = 0.5 + 0.25 * ((xx - 0.5) * np.cos(angle) + (yy - 0.5) * np.sin(angle))
        for _ in range(rng.integers(5, 11)):
            cy, cx = rng.uniform(0, 1, size=2)
            ry, rx = rng.uniform(0.05, 0.35, size=2)
            tilt = rng.uniform(0, np.pi)
            dy, dx = yy - cy, xx - cx
            u = dy * np.cos(tilt) + dx * np.sin(tilt)
            v = -dy * np.sin(tilt) + dx * np.cos(tilt)
            if rng.random() < 0.5:
                mask = (u / ry) ** 2 + (v / rx) ** 2 <= 1.0
            else:
                mask = (np.abs(u) <= ry) & (np.abs(v) <= rx)
            field = np.where(mask, rng.uniform(0.3, 0.7), field)
        fy, fx = rng.uniform(2, 6, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        field += texture * np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
        field = gaussian_filter(field, sigma=blur, mode="reflect")
        chans.append(field)
    data = np.stack(chans).astype(np.float32)
    data = lo + (hi - lo) * np.clip(data, 0.0, 1.0)
    return Image(data.astype(np.float32))
