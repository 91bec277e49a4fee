"""pdlab: adapt pixel-independent denoisers to spatially correlated noise
via pixel-shuffle down-sampling."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .denoise import DctThreshold, LearnedToy, Oracle, PdConfig, blend, denoise_nonblind, flat_region_map, pd_refine
from .estimate import (
    AdaptationResult,
    Histogram,
    adapt_stride,
    changing_factor,
    estimate_map_classical,
    estimate_map_learned,
    histogram_awgn,
)
from .image import Image, ImageError, extract_patches, load_image, make_rng, save_image
from .metrics import QualityScore, psnr, quality, ssim
from .noise import (
    NoiseMap,
    NoiseSpec,
    add_awgn,
    add_correlated_awgn,
    add_mixed,
    add_rvin,
    add_signal_dependent,
    load_noise_map,
    save_map_visualization,
    save_noise_map,
)
from .shuffle import Mosaic, pd_down, pd_up, refill_subimage
from .synthdata import synthetic_scene

__version__ = "0.1.0"
