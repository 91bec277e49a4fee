"""Pixel-shuffle down-sampling (space-to-depth mosaic) and its inverse.

pd_down rearranges an image into the s x s grid of its stride-s sub-images;
no interpolation, pixels are only permuted, so the transform is exactly
invertible and preserves the value multiset (and therefore any noise
distribution). Dimensions must divide by the stride; callers crop first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image, ImageError


@dataclass(frozen=True)
class Mosaic:
    """Tiled sub-images: tile (a, b) holds input pixels (y*s + b, x*s + a)."""

    image: Image
    stride: int

    @property
    def grid(self) -> int:
        return self.stride

    def subimage(self, a: int, b: int) -> np.ndarray:
        """Read-only view of tile (a, b); a indexes columns, b rows."""
        _check_index(self.stride, a, b)
        hs = self.image.height // self.stride
        ws = self.image.width // self.stride
        view = self.image.data[:, b * hs : (b + 1) * hs, a * ws : (a + 1) * ws]
        view.flags.writeable = False
        return view


def _check_index(stride: int, a: int, b: int) -> None:
    if not (0 <= a < stride and 0 <= b < stride):
        raise IndexError(f"sub-image index ({a}, {b}) outside {stride}x{stride} grid")


def pd_down(img: Image, s: int) -> Mosaic:
    """Rearrange into the mosaic of s^2 stride-s sub-images."""
    if s < 1:
        raise ImageError(f"stride must be >= 1, got {s}")
    if img.height % s or img.width % s:
        raise ImageError(
            f"stride {s} does not divide image {img.width}x{img.height}"
        )
    if s == 1:
        return Mosaic(Image(img.data.copy()), 1)
    c, h, w = img.data.shape
    hs, ws = h // s, w // s
    # (c, hs, s, ws, s) axes (c, y, b, x, a) -> (c, b, y, a, x)
    tiles = img.data.reshape(c, hs, s, ws, s).transpose(0, 2, 1, 4, 3)
    return Mosaic(Image(np.ascontiguousarray(tiles).reshape(c, h, w)), s)


def pd_up(mosaic: Mosaic, s: int) -> Image:
    """Exact inverse of pd_down."""
    if s != mosaic.stride:
        raise ImageError(f"stride mismatch: mosaic has {mosaic.stride}, got {s}")
    if s == 1:
        return Image(mosaic.image.data.copy())
    c, h, w = mosaic.image.data.shape
    hs, ws = h // s, w // s
    tiles = mosaic.image.data.reshape(c, s, hs, s, ws).transpose(0, 2, 1, 4, 3)
    return Image(np.ascontiguousarray(tiles).reshape(c, h, w))


def refill_subimage(denoised: Mosaic, noisy: Mosaic, index: tuple[int, int]) -> Mosaic:
    """Copy of `denoised` with tile `index` replaced by the noisy tile."""
    if denoised.stride != noisy.stride:
        raise ImageError("mosaic stride mismatch")
    if denoised.image.data.shape != noisy.image.data.shape:
        raise ImageError("mosaic shape mismatch")
    a, b = index
    s = denoised.stride
    _check_index(s, a, b)
    hs = denoised.image.height // s
    ws = denoised.image.width // s
    out = denoised.image.data.copy()
    out[:, b * hs : (b + 1) * hs, a * ws : (a + 1) * ws] = noisy.image.data[
        :, b * hs : (b + 1) * hs, a * ws : (a + 1) * ws
    ]
    return Mosaic(Image(out), s)


def divisible_crop(img: Image, s: int) -> Image:
    """Largest top-left crop whose dimensions divide by s."""
    h = img.height - img.height % s
    w = img.width - img.width % s
    if h == 0 or w == 0:
        raise ImageError(f"image {img.width}x{img.height} too small for stride {s}")
    if h == img.height and w == img.width:
        return img
    return Image(img.data[:, :h, :w].copy())
