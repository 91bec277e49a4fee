"""Pixel-wise noise estimation and automatic stride adaptation.

The classical estimator is a robust stand-in with the same contract as the
learned one: per block and channel it reads the AWGN level off the median
absolute deviation of a 3x3 Laplacian response, detects impulses as large
deviations from the local median, and bilinearly interpolates the block grid
to a full-resolution six-channel map.

Stride adaptation compares per-channel histograms of the AWGN map across
consecutive pixel-shuffle strides: once the distribution stops changing
(change factor below tau) the noise is as good as pixel-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.ndimage import convolve, median_filter

from .image import Image, ImageError
from .noise import NoiseMap
from .shuffle import divisible_crop, pd_down

_LAPLACIAN = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
_LAPLACIAN_GAIN = np.sqrt(np.sum(_LAPLACIAN**2))  # response std = gain * sigma
_MAD_TO_STD = 1.4826

DEFAULT_TAU = 0.008
DEFAULT_S_MAX = 5
MIN_SUBIMAGE = 32

# Stride adaptation wants a wider, denser block-estimate distribution than
# plain map estimation: small blocks smooth the 10-bin histograms enough that
# r_s stays below tau under pure AWGN at every stride.
DEFAULT_ADAPT_BLOCK = 12

HIST_BINS = 10


@dataclass(frozen=True)
class Histogram:
    """Normalized 10-bin histograms of the three AWGN channels, shape (3, 10)."""

    bins: np.ndarray

    def __post_init__(self):
        if self.bins.shape != (3, HIST_BINS):
            raise ValueError(f"expected (3, {HIST_BINS}) bins, got {self.bins.shape}")


@dataclass(frozen=True)
class AdaptationResult:
    chosen_stride: int
    r_sequence: list  # [(s, r_s), ...] for s = 1..s_max
    threshold: float
    converged: bool

    def to_json(self) -> dict:
        return {
            "chosen_stride": self.chosen_stride,
            "tau": self.threshold,
            "r": [[s, r] for s, r in self.r_sequence],
            "converged": self.converged,
        }


def _block_starts(dim: int, block: int) -> np.ndarray:
    starts = list(range(0, dim - block + 1, block))
    if starts[-1] != dim - block:
        starts.append(dim - block)  # tail block overlaps so every pixel is covered
    return np.asarray(starts)


def _grid_to_map(grid: np.ndarray, cy: np.ndarray, cx: np.ndarray, h: int, w: int) -> np.ndarray:
    """Bilinear interpolation of block-centre samples to a full (h, w) map."""

    def axis_weights(centres, dim):
        q = np.clip(np.arange(dim, dtype=np.float64), centres[0], centres[-1])
        hi = np.clip(np.searchsorted(centres, q, side="right"), 1, len(centres) - 1)
        lo = hi - 1
        span = centres[hi] - centres[lo]
        t = np.where(span > 0, (q - centres[lo]) / np.where(span > 0, span, 1.0), 0.0)
        return lo, hi, t

    ylo, yhi, ty = axis_weights(cy, h)
    xlo, xhi, tx = axis_weights(cx, w)
    ty = ty[:, None]
    tx = tx[None, :]
    top = grid[np.ix_(ylo, xlo)] * (1 - tx) + grid[np.ix_(ylo, xhi)] * tx
    bot = grid[np.ix_(yhi, xlo)] * (1 - tx) + grid[np.ix_(yhi, xhi)] * tx
    return top * (1 - ty) + bot * ty


def _mad_sigma(blocks: np.ndarray) -> np.ndarray:
    # blocks: (..., block*block) Laplacian responses
    med = np.median(blocks, axis=-1, keepdims=True)
    mad = np.median(np.abs(blocks - med), axis=-1)
    return _MAD_TO_STD * mad / _LAPLACIAN_GAIN


def _channel_grids(chan: np.ndarray, block: int, impulse_thresh: float):
    h, w = chan.shape
    resp = convolve(chan.astype(np.float64), _LAPLACIAN, mode="reflect")
    med3 = median_filter(chan, size=3, mode="reflect")
    impulses = (np.abs(chan - med3) > impulse_thresh).astype(np.float64)
    ys = _block_starts(h, block)
    xs = _block_starts(w, block)
    sig = np.empty((len(ys), len(xs)), dtype=np.float64)
    imp = np.empty_like(sig)

    def tiles(arr, ny, nx):
        t = arr[: ny * block, : nx * block].reshape(ny, block, nx, block)
        return t.transpose(0, 2, 1, 3).reshape(ny, nx, block * block)

    # vectorized grid of full non-overlapping blocks; tail blocks (overlapping,
    # anchored at the far edge) are filled in below
    ny, nx = h // block, w // block
    sig[:ny, :nx] = _mad_sigma(tiles(resp, ny, nx))
    imp[:ny, :nx] = tiles(impulses, ny, nx).mean(axis=-1)
    for i, y0 in enumerate(ys):
        for j, x0 in enumerate(xs):
            if i < ny and j < nx:
                continue
            r = resp[y0 : y0 + block, x0 : x0 + block].reshape(1, -1)
            sig[i, j] = _mad_sigma(r)[0]
            imp[i, j] = impulses[y0 : y0 + block, x0 : x0 + block].mean()
    cy = ys + (block - 1) / 2.0
    cx = xs + (block - 1) / 2.0
    return sig, imp, cy, cx


def estimate_map_classical(img: Image, block: int = 32, impulse_thresh: float = 0.2) -> NoiseMap:
    """Blockwise Laplacian-MAD AWGN level + median-deviation impulse ratio.

    Levels are normalized like ground-truth maps: sigma (8-bit units) / 75 in
    the AWGN channels, corrupted fraction / 0.3 in the RVIN channels.
    """
    if block < 8:
        raise ImageError(f"block must be >= 8, got {block}")
    if img.height < block or img.width < block:
        raise ImageError(
            f"image {img.width}x{img.height} smaller than one {block}x{block} block"
        )
    data = np.zeros((6, img.height, img.width), dtype=np.float32)
    for ci in range(img.channels):
        sig, imp, cy, cx = _channel_grids(img.data[ci], block, impulse_thresh)
        awgn = _grid_to_map(sig, cy, cx, img.height, img.width) * 255.0 / 75.0
        rvin = _grid_to_map(imp, cy, cx, img.height, img.width) / 0.3
        targets = range(3) if img.channels == 1 else [ci]
        for t in targets:
            data[t] = np.clip(awgn, 0.0, 1.0)
            data[t + 3] = np.clip(rvin, 0.0, 1.0)
    return NoiseMap(data)


def estimate_map_learned(img: Image, model) -> NoiseMap:
    """Forward pass of a trained estimator network, clamped to [0, 1]."""
    from .nn.model import run_estimator

    return run_estimator(model, img)


def histogram_awgn(nmap: NoiseMap) -> Histogram:
    """10 equal bins over [0, 1] per AWGN channel; top bin closed at 1.0."""
    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    n = nmap.height * nmap.width
    bins = np.empty((3, HIST_BINS), dtype=np.float64)
    for c in range(3):
        counts, _ = np.histogram(nmap.data[c], bins=edges)
        bins[c] = counts / n
    return Histogram(bins)


def changing_factor(h_a: Histogram, h_b: Histogram) -> float:
    """Mean over channels of the squared L2 distance between bin vectors."""
    d = h_a.bins - h_b.bins
    return float(np.mean(np.sum(d * d, axis=1)))


def adapt_stride(
    img: Image,
    estimator=None,
    tau: float = DEFAULT_TAU,
    s_max: int = DEFAULT_S_MAX,
) -> AdaptationResult:
    """Smallest stride s at which the AWGN-map histogram stops changing.

    r_s compares the map of the stride-s mosaic with the stride-(s+1) one, so
    maps are evaluated for s = 1..s_max+1. If no r_s falls below tau the
    result carries s_max with converged=False.
    """
    if s_max < 2:
        raise ValueError(f"s_max must be >= 2, got {s_max}")
    if estimator is None:
        estimator = partial(estimate_map_classical, block=DEFAULT_ADAPT_BLOCK)
    if min(img.height, img.width) // (s_max + 1) < MIN_SUBIMAGE:
        raise ImageError(
            f"image {img.width}x{img.height} too small for stride {s_max} adaptation "
            f"(sub-images must stay >= {MIN_SUBIMAGE}px)"
        )
    hists = []
    for s in range(1, s_max + 2):
        mosaic = pd_down(divisible_crop(img, s), s)
        hists.append(histogram_awgn(estimator(mosaic.image)))
    r_sequence = [(s, changing_factor(hists[s - 1], hists[s])) for s in range(1, s_max + 1)]
    chosen = next((s for s, r in r_sequence if r < tau), s_max)
    converged = any(r < tau for _, r in r_sequence)
    return AdaptationResult(chosen, r_sequence, tau, converged)
