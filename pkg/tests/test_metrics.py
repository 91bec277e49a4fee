import math

import numpy as np
import pytest

from pdlab import Image, ImageError, make_rng, psnr, quality, ssim
from pdlab.synthdata import synthetic_scene


def test_psnr_identical_is_inf(scene):
    assert psnr(scene, scene) == math.inf


def test_psnr_uniform_difference():
    a = Image(np.full((1, 32, 32), 0.5, dtype=np.float32))
    b = Image(np.full((1, 32, 32), 0.5 + 25 / 255, dtype=np.float32))
    assert abs(psnr(a, b) - 20 * math.log10(255 / 25)) < 1e-3
    assert abs(psnr(a, b) - 20.1720) < 1e-3


def test_psnr_full_scale_difference_is_zero():
    a = Image(np.zeros((1, 8, 8), dtype=np.float32))
    b = Image(np.ones((1, 8, 8), dtype=np.float32))
    assert abs(psnr(a, b)) < 1e-9


def test_psnr_monotone_in_mse(scene, rng):
    small = Image(np.clip(scene.data + 0.01, 0, 1))
    large = Image(np.clip(scene.data + 0.05, 0, 1))
    assert psnr(scene, small) > psnr(scene, large)


def test_dimension_mismatch():
    a = Image(np.zeros((1, 16, 16), dtype=np.float32))
    b = Image(np.zeros((1, 16, 17), dtype=np.float32))
    with pytest.raises(ImageError):
        psnr(a, b)
    with pytest.raises(ImageError):
        ssim(a, b)


def test_ssim_self_is_one(scene):
    assert ssim(scene, scene) == 1.0


def test_ssim_structural_inversion():
    # textured, mid-gray-avoiding image: every window has structure to invert
    yy, xx = np.mgrid[0:96, 0:96].astype(np.float64)
    pattern = 0.2 + 0.1 * np.sin(2 * np.pi * xx / 7) * np.sin(2 * np.pi * yy / 5)
    img = Image(pattern[None].astype(np.float32))
    inverted = Image(1.0 - img.data)
    assert ssim(img, inverted) < 0.1


def test_symmetry_on_random_pairs():
    rng = make_rng(22)
    for _ in range(5):
        a = Image(rng.random((3, 24, 24), dtype=np.float32))
        b = Image(rng.random((3, 24, 24), dtype=np.float32))
        assert psnr(a, b) == psnr(b, a)
        assert ssim(a, b) == ssim(b, a)


def test_ssim_bounds(rng):
    for _ in range(5):
        a = Image(rng.random((1, 16, 16), dtype=np.float32))
        b = Image(rng.random((1, 16, 16), dtype=np.float32))
        assert -1.0 <= ssim(a, b) <= 1.0


def test_ssim_too_small():
    a = Image(np.zeros((1, 10, 10), dtype=np.float32))
    with pytest.raises(ImageError, match="small"):
        ssim(a, a)


def test_quality_bundle(scene):
    q = quality(scene, scene)
    assert q.psnr == math.inf and q.ssim == 1.0
