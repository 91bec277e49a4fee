"""Same-size 2-D cross-correlation, forward and exact backward.

Layout is NCHW. The forward lowers to an im2col matmul (BLAS does the heavy
lifting); the input gradient reuses the same path as a cross-correlation
with the 180-degree-rotated, channel-swapped kernel.
"""

from __future__ import annotations

import numpy as np


def _im2col(x: np.ndarray, kh: int, kw: int, pad: int) -> np.ndarray:
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    oh, ow = win.shape[2], win.shape[3]
    # (n, c, oh, ow, kh, kw) -> (n*oh*ow, c*kh*kw)
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    return np.ascontiguousarray(cols)


def conv2d_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray, pad: int = 1, return_cols: bool = False
):
    """x: (n, cin, h, w); w: (cout, cin, kh, kw); b: (cout,)."""
    n, cin, h, wd = x.shape
    cout, cin_w, kh, kw = w.shape
    if cin != cin_w:
        raise ValueError(f"channel mismatch: input {cin}, kernel {cin_w}")
    oh = h + 2 * pad - kh + 1
    ow = wd + 2 * pad - kw + 1
    cols = _im2col(x, kh, kw, pad)
    out = cols @ w.reshape(cout, -1).T + b
    out = out.reshape(n, oh, ow, cout).transpose(0, 3, 1, 2)
    if return_cols:
        return out, cols
    return out


def conv2d_backward(
    grad_out: np.ndarray, x: np.ndarray, w: np.ndarray, pad: int = 1, cols: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d_forward w.r.t. input, kernel and bias.

    `cols` may pass the forward's im2col matrix to avoid recomputing it.
    """
    n, cout, oh, ow = grad_out.shape
    _, cin, kh, kw = w.shape
    gcols = grad_out.transpose(0, 2, 3, 1).reshape(n * oh * ow, cout)
    if cols is None:
        cols = _im2col(x, kh, kw, pad)
    grad_w = (gcols.T @ cols).reshape(w.shape)
    grad_b = gcols.sum(axis=0)
    # full correlation with the flipped, in/out-swapped kernel
    w_t = np.ascontiguousarray(np.flip(w, axis=(2, 3)).transpose(1, 0, 2, 3))
    grad_x = conv2d_forward(grad_out, w_t, np.zeros(cin, dtype=w.dtype), pad=kh - 1 - pad)
    return grad_x, grad_w, grad_b
