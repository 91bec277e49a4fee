"""Kernel lane agreement and DCT denoiser contracts."""

import numpy as np
import pytest
from scipy.fftpack import dctn, idctn

from pdlab import _kernels, make_rng
from pdlab._kernels import pure


def reference_dct_denoise(image, sigma, thresh_mult=3.0):
    """Independent slow oracle built on scipy's DCT, block by block."""
    c, h, w = image.shape
    out = np.zeros((c, h, w))
    counts = np.zeros((h, w))
    for ci in range(c):
        counts[:] = 0
        acc = np.zeros((h, w))
        for y in range(h - 7):
            for x in range(w - 7):
                block = image[ci, y : y + 8, x : x + 8].astype(np.float64)
                coeff = dctn(block, norm="ortho")
                thr = thresh_mult * sigma[ci, y : y + 8, x : x + 8].mean()
                mask = np.abs(coeff) >= thr
                mask[0, 0] = True
                rec = idctn(coeff * mask, norm="ortho")
                acc[y : y + 8, x : x + 8] += rec
                counts[y : y + 8, x : x + 8] += 1
        out[ci] = acc / counts
    return out.astype(np.float32)


@pytest.fixture
def small_case():
    rng = make_rng(77)
    image = rng.random((2, 24, 20), dtype=np.float32)
    sigma = (rng.random((2, 24, 20), dtype=np.float32) * 0.1).astype(np.float32)
    return image, sigma


def test_pure_matches_scipy_reference(small_case):
    image, sigma = small_case
    ours = pure.dct_denoise(image, sigma)
    ref = reference_dct_denoise(image, sigma)
    assert np.allclose(ours, ref, atol=1e-5)


def test_active_backend_matches_pure(small_case):
    image, sigma = small_case
    a = _kernels.dct_denoise(image, sigma)
    b = pure.dct_denoise(image, sigma)
    assert np.allclose(a, b, atol=1e-5)


@pytest.mark.skipif(_kernels.BACKEND != "cython", reason="compiled lane not built")
def test_compiled_matches_reference(small_case):
    from pdlab._kernels import _cykernels

    image, sigma = small_case
    ours = _cykernels.dct_denoise(image, sigma)
    ref = reference_dct_denoise(image, sigma)
    assert np.allclose(ours, ref, atol=1e-5)


def test_zero_threshold_reconstructs_input(rng):
    image = rng.random((1, 32, 32), dtype=np.float32)
    sigma = np.zeros_like(image)
    out = _kernels.dct_denoise(image, sigma)
    assert np.allclose(out, image, atol=1e-6)


def test_huge_threshold_smooths(rng):
    image = (0.5 + 0.1 * rng.standard_normal((1, 32, 32))).astype(np.float32)
    sigma = np.full_like(image, 10.0)
    out = _kernels.dct_denoise(image, sigma)
    assert out.std() < image.std() * 0.2  # only DC survives per block


def test_too_small_rejected(rng):
    image = rng.random((1, 6, 6), dtype=np.float32)
    with pytest.raises(ValueError):
        _kernels.dct_denoise(image, np.zeros_like(image))


def test_dct_matrix_orthonormal():
    d = pure.dct_matrix()
    assert np.allclose(d @ d.T, np.eye(8), atol=1e-12)


def test_window_counts_corners():
    counts = pure.window_counts(16, 16)
    assert counts[0, 0] == 1
    assert counts[7, 7] == 64
    assert counts[-1, -1] == 1
    assert counts[8, 8] == 64
