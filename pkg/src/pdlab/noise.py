"""Synthetic noise families and their ground-truth noise-level maps.

Levels follow 8-bit conventions: AWGN sigma in [0, 75] (std on the 0..255
scale), impulse corruption ratio in [0, 0.3]. Maps normalize by those upper
bounds so every channel lives in [0, 1]. Noisy outputs are clamped to [0, 1]
(8-bit image formation); the maps describe the pre-clamp parameters.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import Image, ImageError, save_image

SIGMA_MAX = 75.0
RATIO_MAX = 0.3

# NoiseMap channel order
AWGN_R, AWGN_G, AWGN_B, RVIN_R, RVIN_G, RVIN_B = range(6)

_NMAP_MAGIC = b"NMAP"


@dataclass(frozen=True)
class NoiseMap:
    """Six pixel-wise maps: AWGN level and RVIN ratio per RGB channel.

    data has shape (6, h, w), values in [0, 1]; AWGN channels store sigma/75,
    RVIN channels store ratio/0.3.
    """

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != 6:
            raise ImageError(f"noise map must be (6, h, w), got {self.data.shape}")
        if self.data.dtype != np.float32:
            object.__setattr__(self, "data", self.data.astype(np.float32))

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def awgn(self) -> np.ndarray:
        return self.data[:3]

    @property
    def rvin(self) -> np.ndarray:
        return self.data[3:]


def uniform_map(height: int, width: int, sigma: float = 0.0, ratio: float = 0.0) -> NoiseMap:
    data = np.empty((6, height, width), dtype=np.float32)
    data[:3] = sigma / SIGMA_MAX
    data[3:] = ratio / RATIO_MAX
    return NoiseMap(data)


def save_noise_map(nmap: NoiseMap, path) -> None:
    """Binary map file: magic, u32 w/h/c, float32 LE planar data."""
    with open(path, "wb") as fh:
        fh.write(_NMAP_MAGIC)
        fh.write(struct.pack("<III", nmap.width, nmap.height, 6))
        fh.write(nmap.data.astype("<f4").tobytes())


def load_noise_map(path) -> NoiseMap:
    blob = Path(path).read_bytes()
    if blob[:4] != _NMAP_MAGIC:
        raise ImageError(f"not a noise map file: {path}")
    w, h, c = struct.unpack("<III", blob[4:16])
    if c != 6:
        raise ImageError(f"noise map with {c} channels not supported")
    data = np.frombuffer(blob[16:], dtype="<f4")
    if data.size != w * h * c:
        raise ImageError("noise map payload truncated")
    return NoiseMap(data.reshape(6, h, w).copy())


def save_map_visualization(nmap: NoiseMap, path) -> None:
    """False-colour PNG of the AWGN channels (levels mapped straight to RGB)."""
    save_image(Image(np.clip(nmap.awgn, 0.0, 1.0).astype(np.float32)), path)


def _check_sigma(sigma: float) -> float:
    if not 0.0 <= sigma <= SIGMA_MAX:
        raise ValueError(f"sigma must be in [0, {SIGMA_MAX:g}], got {sigma}")
    return float(sigma)


def _check_ratio(ratio: float) -> float:
    if not 0.0 <= ratio <= RATIO_MAX:
        raise ValueError(f"ratio must be in [0, {RATIO_MAX:g}], got {ratio}")
    return float(ratio)


def _broadcast_channels(img: Image) -> int:
    # maps always carry 3 colour channels; grayscale reuses one estimate
    return img.channels


def add_awgn(img: Image, sigma: float, rng: np.random.Generator) -> tuple[Image, NoiseMap]:
    """y = clamp(x + n), n ~ N(0, (sigma/255)^2) i.i.d. per sample."""
    _check_sigma(sigma)
    noise = rng.standard_normal(img.data.shape, dtype=np.float32) * np.float32(sigma / 255.0)
    noisy = Image(np.clip(img.data + noise, 0.0, 1.0))
    return noisy, uniform_map(img.height, img.width, sigma=sigma)


def add_rvin(
    img: Image, ratio: float, rng: np.random.Generator, per_channel: bool = True
) -> tuple[Image, NoiseMap]:
    """Replace samples with Uniform[0,1] draws with probability `ratio`.

    per_channel=True corrupts each channel independently; otherwise one mask
    is shared so a corrupted pixel is replaced in every channel (with
    independent replacement values).
    """
    _check_ratio(ratio)
    shape = img.data.shape
    if per_channel:
        mask = rng.random(shape) < ratio
    else:
        mask = np.broadcast_to(rng.random(shape[1:]) < ratio, shape)
    values = rng.random(shape, dtype=np.float32)
    noisy = np.where(mask, values, img.data)
    return Image(noisy), uniform_map(img.height, img.width, ratio=ratio)


def add_mixed(
    img: Image, sigma: float, ratio: float, rng: np.random.Generator, per_channel: bool = True
) -> tuple[Image, NoiseMap]:
    """AWGN first, then impulse replacement on the AWGN-corrupted image."""
    gauss, gmap = add_awgn(img, sigma, rng)
    noisy, rmap = add_rvin(gauss, ratio, rng, per_channel=per_channel)
    data = gmap.data.copy()
    data[3:] = rmap.data[3:]
    return noisy, NoiseMap(data)


def add_signal_dependent(
    img: Image, sigma_s: float, sigma_c: float, rng: np.random.Generator
) -> tuple[Image, NoiseMap]:
    """Per-pixel variance x*(sigma_s/255)^2 + (sigma_c/255)^2.

    The map's AWGN channels carry the per-pixel equivalent std
    sqrt(x*sigma_s^2 + sigma_c^2) / 75 so downstream consumers speak one map
    language.
    """
    if sigma_s < 0 or sigma_c < 0:
        raise ValueError("sigma_s and sigma_c must be non-negative")
    var = img.data * (sigma_s / 255.0) ** 2 + (sigma_c / 255.0) ** 2
    noise = rng.standard_normal(img.data.shape, dtype=np.float32) * np.sqrt(var, dtype=np.float32)
    noisy = Image(np.clip(img.data + noise, 0.0, 1.0))
    equiv = np.sqrt(img.data * sigma_s**2 + sigma_c**2) / SIGMA_MAX
    data = np.zeros((6, img.height, img.width), dtype=np.float32)
    if img.channels == 3:
        data[:3] = equiv
    else:
        data[:3] = equiv[0]
    return noisy, NoiseMap(np.clip(data, 0.0, 1.0))


def add_correlated_awgn(img: Image, sigma: float, upscale: int, rng: np.random.Generator) -> Image:
    """Spatially correlated Gaussian noise with correlation length `upscale`.

    A white field is drawn at (h/upscale, w/upscale) and replicated to full
    resolution so each upscale x upscale cell shares one value; replication
    preserves the per-sample std sigma/255 exactly, and subsampling at the
    cell period recovers a pixel-independent field. Approximates the
    correlation that demosaicing leaves in real sRGB noise.
    """
    _check_sigma(sigma)
    if upscale < 2:
        raise ValueError("upscale must be >= 2")
    if img.height % upscale or img.width % upscale:
        raise ValueError(
            f"upscale {upscale} does not divide image {img.width}x{img.height}"
        )
    low = rng.standard_normal(
        (img.channels, img.height // upscale, img.width // upscale), dtype=np.float32
    )
    full = np.repeat(np.repeat(low, upscale, axis=1), upscale, axis=2)
    noisy = img.data + full * np.float32(sigma / 255.0)
    return Image(np.clip(noisy, 0.0, 1.0))


@dataclass
class NoiseSpec:
    """Parameters of one synthetic noise process; levels clamp to bounds."""

    kind: str = "awgn"  # awgn | rvin | mixed | signal | correlated
    sigma: float = 25.0
    ratio: float = 0.0
    sigma_s: float = 0.0
    sigma_c: float = 0.0
    upscale: int = 2
    per_channel: bool = True

    KINDS = ("awgn", "rvin", "mixed", "signal", "correlated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {self.KINDS}")
        self.sigma = float(np.clip(self.sigma, 0.0, SIGMA_MAX))
        self.ratio = float(np.clip(self.ratio, 0.0, RATIO_MAX))

    def apply(self, img: Image, rng: np.random.Generator) -> tuple[Image, NoiseMap]:
        if self.kind == "awgn":
            return add_awgn(img, self.sigma, rng)
        if self.kind == "rvin":
            return add_rvin(img, self.ratio, rng, per_channel=self.per_channel)
        if self.kind == "mixed":
            return add_mixed(img, self.sigma, self.ratio, rng, per_channel=self.per_channel)
        if self.kind == "signal":
            return add_signal_dependent(img, self.sigma_s, self.sigma_c, rng)
        noisy = add_correlated_awgn(img, self.sigma, self.upscale, rng)
        return noisy, uniform_map(img.height, img.width, sigma=self.sigma)
