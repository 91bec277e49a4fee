"""Non-blind denoisers behind one interface plus the PD refinement pipeline.

The pipeline: (1) pick the smallest stride at which the noise-map histogram
stabilizes and shuffle the image into its mosaic; (2) denoise the mosaic;
(3) for each grid position, refill that one noisy sub-image into the denoised
mosaic and inverse-shuffle; (4) denoise every refilled full-resolution
variant and average them into the texture result T; (5) blend with the
over-smoothed flat result F (denoised under the spatially-lifted map) as
k*F + (1-k)*T.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .estimate import (
    DEFAULT_ADAPT_BLOCK,
    DEFAULT_S_MAX,
    DEFAULT_TAU,
    adapt_stride,
    estimate_map_classical,
    estimate_map_learned,
)
from .image import Image, ImageError
from .noise import SIGMA_MAX, NoiseMap
from .shuffle import Mosaic, pd_down, pd_up, refill_subimage


@dataclass(frozen=True)
class DctThreshold:
    """Sliding 8x8 DCT hard-threshold denoiser (classical stand-in)."""

    thresh_mult: float = 3.0

    name = "dct"


@dataclass(frozen=True)
class LearnedToy:
    """Trained conditional residual network."""

    model: object

    name = "learned"


@dataclass(frozen=True)
class Oracle:
    """Test-only: returns the stored clean image (cropped to the request)."""

    clean: Image

    name = "oracle"


DenoiserKind = DctThreshold | LearnedToy | Oracle


@dataclass
class PdConfig:
    tau: float = DEFAULT_TAU
    s_max: int = DEFAULT_S_MAX
    stride_override: int | None = None
    k: float = 0.0
    denoiser: DenoiserKind = field(default_factory=DctThreshold)
    estimator: str = "classical"  # classical | learned
    model: object | None = None  # required when estimator == "learned"
    block: int = 32  # map estimation granularity for denoising
    adapt_block: int = DEFAULT_ADAPT_BLOCK  # finer grid for stride adaptation
    mode: str = "full"  # full | i-only | di-only

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"k must be in [0,1], got {self.k}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.mode not in ("full", "i-only", "di-only"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.estimator not in ("classical", "learned"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "learned" and self.model is None:
            raise ValueError("learned estimator requires a model")

    def estimate(self, img: Image, block: int | None = None) -> NoiseMap:
        if self.estimator == "learned":
            return estimate_map_learned(img, self.model)
        return estimate_map_classical(img, block=block or self.block)


def denoise_nonblind(y: Image, nmap: NoiseMap, kind: DenoiserKind) -> Image:
    """Dispatch to the configured denoiser, conditioned on the given map."""
    if isinstance(kind, Oracle):
        clean = kind.clean
        if y.height > clean.height or y.width > clean.width:
            raise ImageError("oracle clean reference smaller than the input")
        return Image(clean.data[:, : y.height, : y.width].copy())
    if (nmap.height, nmap.width) != (y.height, y.width):
        raise ImageError(
            f"map {nmap.width}x{nmap.height} does not match image {y.width}x{y.height}"
        )
    if isinstance(kind, LearnedToy):
        from .nn.model import run_denoiser

        return run_denoiser(kind.model, y, nmap)
    # DCT: de-normalize map levels to a per-pixel std on the [0,1] scale
    sel = range(y.channels) if y.channels == 3 else [0] * y.channels
    sigma = np.stack([nmap.awgn[c] for c in sel]) * np.float32(SIGMA_MAX / 255.0)
    out = _kernels.dct_denoise(y.data, sigma.astype(np.float32), kind.thresh_mult)
    return Image(np.clip(out, 0.0, 1.0))


def flat_region_map(nmap: NoiseMap) -> NoiseMap:
    """Lift every channel to its own spatial maximum (over-smoothing map)."""
    flat = np.broadcast_to(
        nmap.data.max(axis=(1, 2), keepdims=True), nmap.data.shape
    )
    return NoiseMap(np.ascontiguousarray(flat))


def blend(f: Image, t: Image, k: float) -> Image:
    """Pixel-wise convex combination k*F + (1-k)*T; endpoints are exact."""
    if f.data.shape != t.data.shape:
        raise ImageError(f"blend shape mismatch: {f.data.shape} vs {t.data.shape}")
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"k must be in [0,1], got {k}")
    if k == 0.0:
        return t.copy()
    if k == 1.0:
        return f.copy()
    lo = np.minimum(f.data, t.data)
    hi = np.maximum(f.data, t.data)
    out = np.clip(np.float32(k) * f.data + np.float32(1.0 - k) * t.data, lo, hi)
    return Image(out)


def _average(images: list[np.ndarray]) -> np.ndarray:
    acc = np.zeros(images[0].shape, dtype=np.float64)
    for arr in images:
        acc += arr
    return (acc / len(images)).astype(np.float32)


def _feather_strip(core: np.ndarray, direct: np.ndarray, s: int, width: int = 4) -> np.ndarray:
    """Stitch the PD core over the direct result; the strip keeps the direct
    pixels plus a seam correction that decays over `width` pixels and is zero
    wherever the two paths agree."""
    out = direct.copy()
    ch, hc, wc = core.shape
    out[:, :hc, :wc] = core
    h, w = direct.shape[1:]
    if hc < h:
        seam_delta = core[:, hc - 1 : hc, :wc] - direct[:, hc - 1 : hc, :wc]
        for d in range(1, min(width, h - hc) + 1):
            fade = np.float32(1.0 - d / (width + 1))
            out[:, hc + d - 1, :wc] = direct[:, hc + d - 1, :wc] + fade * seam_delta[:, 0]
    if wc < w:
        seam_delta = core[:, :hc, wc - 1 : wc] - direct[:, :hc, wc - 1 : wc]
        for d in range(1, min(width, w - wc) + 1):
            fade = np.float32(1.0 - d / (width + 1))
            out[:, :hc, wc + d - 1] = direct[:, :hc, wc + d - 1] + fade * seam_delta[:, :, 0]
    return out


def pd_refine(y: Image, cfg: PdConfig, reference: Image | None = None) -> tuple[Image, dict]:
    """Run the five-step refinement; returns the result and a JSON-able report."""
    if min(y.height, y.width) < 64:
        raise ImageError(f"image {y.width}x{y.height} too small for refinement (min 64)")
    timings: dict[str, float] = {}
    t_start = time.perf_counter()

    t0 = time.perf_counter()
    adaptation = None
    if cfg.stride_override is not None:
        if cfg.stride_override < 1:
            raise ValueError(f"stride must be >= 1, got {cfg.stride_override}")
        s = cfg.stride_override
    else:
        # adaptation needs sub-images of at least MIN_SUBIMAGE pixels; cap the
        # search depth for small inputs instead of refusing them
        from .estimate import MIN_SUBIMAGE

        s_max = min(cfg.s_max, min(y.height, y.width) // MIN_SUBIMAGE - 1)
        if s_max >= 2:
            adaptation = adapt_stride(
                y,
                lambda im: cfg.estimate(im, block=cfg.adapt_block),
                tau=cfg.tau,
                s_max=s_max,
            )
            s = adaptation.chosen_stride
        else:
            s = 1  # too small to measure correlation; treat as pixel-independent
    timings["adapt"] = (time.perf_counter() - t0) * 1000

    hc = y.height - y.height % s
    wc = y.width - y.width % s
    core = y if (hc, wc) == (y.height, y.width) else Image(y.data[:, :hc, :wc].copy())

    t0 = time.perf_counter()
    noisy_mosaic = pd_down(core, s)
    mosaic_map = cfg.estimate(noisy_mosaic.image)
    den_mosaic = Mosaic(denoise_nonblind(noisy_mosaic.image, mosaic_map, cfg.denoiser), s)
    timings["mosaic"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    t_core: Image | None = None
    if cfg.k < 1.0:
        if cfg.mode == "i-only":
            t_core = pd_up(den_mosaic, s)
        elif cfg.mode == "di-only":
            i_img = pd_up(den_mosaic, s)
            t_core = denoise_nonblind(i_img, cfg.estimate(i_img), cfg.denoiser)
        else:
            variants = []
            for b in range(s):
                for a in range(s):
                    refilled = refill_subimage(den_mosaic, noisy_mosaic, (a, b))
                    z = pd_up(refilled, s)
                    variants.append(
                        denoise_nonblind(z, cfg.estimate(z), cfg.denoiser).data
                    )
            t_core = Image(_average(variants))
    timings["texture"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    needs_direct = (hc, wc) != (y.height, y.width) and cfg.k < 1.0
    full_map = cfg.estimate(y) if (needs_direct or cfg.k > 0.0) else None
    if needs_direct:
        direct = denoise_nonblind(y, full_map, cfg.denoiser)
        t_full = Image(_feather_strip(t_core.data, direct.data, s))
    elif t_core is not None:
        t_full = t_core
    else:
        t_full = None
    f_img = (
        denoise_nonblind(y, flat_region_map(full_map), cfg.denoiser)
        if cfg.k > 0.0
        else None
    )
    timings["flat"] = (time.perf_counter() - t0) * 1000

    if cfg.k == 0.0:
        result = t_full.copy()
    elif cfg.k == 1.0:
        result = f_img.copy()
    else:
        result = blend(f_img, t_full, cfg.k)
    timings["total"] = (time.perf_counter() - t_start) * 1000

    report = {
        "stride": s,
        "converged": adaptation.converged if adaptation is not None else True,
        "r_sequence": adaptation.to_json()["r"] if adaptation is not None else [],
        "k": cfg.k,
        "denoiser": cfg.denoiser.name,
        "mode": cfg.mode,
        "timings_ms": {key: round(val, 3) for key, val in timings.items()},
    }
    if reference is not None:
        from .metrics import psnr

        report["psnr"] = psnr(result, reference)
    return result, report
