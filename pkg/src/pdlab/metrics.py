"""PSNR and single-scale SSIM on [0, 1] images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .image import Image, ImageError

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


@dataclass(frozen=True)
class QualityScore:
    psnr: float  # dB, math.inf for identical images
    ssim: float


def _check_dims(a: Image, b: Image) -> None:
    if a.data.shape != b.data.shape:
        raise ImageError(f"dimension mismatch: {a.data.shape} vs {b.data.shape}")


def psnr(a: Image, b: Image) -> float:
    """10*log10(1/MSE) with peak 1.0; returns inf for identical images."""
    _check_dims(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_kernel1d() -> np.ndarray:
    half = _SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2 * _SSIM_SIGMA**2))
    return k / k.sum()


_KERNEL = _gaussian_kernel1d()


def _filter_valid(x: np.ndarray) -> np.ndarray:
    t = correlate1d(x, _KERNEL, axis=0, mode="constant")
    t = correlate1d(t, _KERNEL, axis=1, mode="constant")
    m = _SSIM_WINDOW // 2
    return t[m:-m, m:-m]


def ssim(a: Image, b: Image) -> float:
    """Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
    K1=0.01, K2=0.03, dynamic range 1.0, mean over valid window positions,
    channel-averaged for colour images."""
    _check_dims(a, b)
    if min(a.height, a.width) < _SSIM_WINDOW:
        raise ImageError(f"image too small for SSIM (min side {_SSIM_WINDOW})")
    c1 = _K1**2
    c2 = _K2**2
    scores = []
    for ci in range(a.channels):
        x = a.data[ci].astype(np.float64)
        y = b.data[ci].astype(np.float64)
        mu_x = _filter_valid(x)
        mu_y = _filter_valid(y)
        var_x = _filter_valid(x * x) - mu_x**2
        var_y = _filter_valid(y * y) - mu_y**2
        cov = _filter_valid(x * y) - mu_x * mu_y
        num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
        den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def quality(a: Image, b: Image) -> QualityScore:
    return QualityScore(psnr=psnr(a, b), ssim=ssim(a, b))
