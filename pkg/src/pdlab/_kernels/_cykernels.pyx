# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lane for the sliding-window DCT denoiser.

Same math as pdlab._kernels.pure: orthonormal 8x8 DCT-II, hard threshold at
thresh_mult * block-mean sigma (DC kept), uniform aggregation, float64
accumulation. The per-block loop with stack buffers avoids the big window
tensors the numpy lane materializes.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF BLOCK = 8


cdef void _dct8_2d(double[8][8] src, double[8][8] dst, double[8][8] basis) noexcept nogil:
    # dst = basis @ src @ basis.T
    cdef double[8][8] tmp
    cdef int i, j, k
    cdef double s
    for i in range(BLOCK):
        for j in range(BLOCK):
            s = 0.0
            for k in range(BLOCK):
                s += basis[i][k] * src[k][j]
            tmp[i][j] = s
    for i in range(BLOCK):
        for j in range(BLOCK):
            s = 0.0
            for k in range(BLOCK):
                s += tmp[i][k] * basis[j][k]
            dst[i][j] = s


cdef void _idct8_2d(double[8][8] src, double[8][8] dst, double[8][8] basis) noexcept nogil:
    # dst = basis.T @ src @ basis
    cdef double[8][8] tmp
    cdef int i, j, k
    cdef double s
    for i in range(BLOCK):
        for j in range(BLOCK):
            s = 0.0
            for k in range(BLOCK):
                s += basis[k][i] * src[k][j]
            tmp[i][j] = s
    for i in range(BLOCK):
        for j in range(BLOCK):
            s = 0.0
            for k in range(BLOCK):
                s += tmp[i][k] * basis[k][j]
            dst[i][j] = s


def dct_denoise(cnp.ndarray image, cnp.ndarray sigma, double thresh_mult=3.0):
    """Mirror of pure.dct_denoise; see that docstring for the contract."""
    cdef cnp.ndarray[cnp.float32_t, ndim=3] img = np.ascontiguousarray(image, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=3] sig = np.ascontiguousarray(sigma, dtype=np.float32)
    cdef int c = img.shape[0]
    cdef int h = img.shape[1]
    cdef int w = img.shape[2]
    if h < BLOCK or w < BLOCK:
        raise ValueError(f"image {w}x{h} smaller than the {BLOCK}x{BLOCK} DCT block")

    basis_np = _dct_matrix()
    cdef double[8][8] basis
    cdef int bi, bj
    for bi in range(BLOCK):
        for bj in range(BLOCK):
            basis[bi][bj] = basis_np[bi, bj]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] acc = np.zeros((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] counts = _window_counts(h, w)
    cdef cnp.ndarray[cnp.float32_t, ndim=3] out = np.empty((c, h, w), dtype=np.float32)

    cdef double[8][8] block
    cdef double[8][8] coeff
    cdef double[8][8] recon
    cdef int ci, y, x, i, j
    cdef double ssum, thr
    cdef float[:, :, ::1] imv = img
    cdef float[:, :, ::1] sgv = sig
    cdef double[:, ::1] accv = acc
    cdef double[:, ::1] cntv = counts
    cdef float[:, :, ::1] outv = out

    for ci in range(c):
        for y in range(h):
            for x in range(w):
                accv[y, x] = 0.0
        with nogil:
            for y in range(h - BLOCK + 1):
                for x in range(w - BLOCK + 1):
                    ssum = 0.0
                    for i in range(BLOCK):
                        for j in range(BLOCK):
                            block[i][j] = imv[ci, y + i, x + j]
                            ssum += sgv[ci, y + i, x + j]
                    thr = thresh_mult * ssum / (BLOCK * BLOCK)
                    _dct8_2d(block, coeff, basis)
                    for i in range(BLOCK):
                        for j in range(BLOCK):
                            if (i or j) and (coeff[i][j] if coeff[i][j] >= 0 else -coeff[i][j]) < thr:
                                coeff[i][j] = 0.0
                    _idct8_2d(coeff, recon, basis)
                    for i in range(BLOCK):
                        for j in range(BLOCK):
                            accv[y + i, x + j] += recon[i][j]
        for y in range(h):
            for x in range(w):
                outv[ci, y, x] = <float>(accv[y, x] / cntv[y, x])
    return out


def _dct_matrix():
    k = np.arange(BLOCK)[:, None]
    j = np.arange(BLOCK)[None, :]
    d = np.cos(np.pi * (2 * j + 1) * k / (2 * BLOCK)) * np.sqrt(2.0 / BLOCK)
    d[0] /= np.sqrt(2.0)
    return d


def _window_counts(int h, int w):
    ys = np.minimum(np.arange(h), h - BLOCK) - np.maximum(np.arange(h) - BLOCK + 1, 0) + 1
    xs = np.minimum(np.arange(w), w - BLOCK) - np.maximum(np.arange(w) - BLOCK + 1, 0) + 1
    return ys[:, None].astype(np.float64) * xs[None, :]
