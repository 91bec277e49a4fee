"""Image container, raster I/O and patch extraction.

Images are planar float32 arrays of shape (channels, height, width) with
samples in [0, 1]. Residuals and noise maps reuse the same container but are
exempt from the range invariant; clamping happens explicitly (save_image,
noise synthesis). All randomness flows through explicit numpy Generators so
every stochastic operation is reproducible from a seed.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError


class ImageError(ValueError):
    """Unreadable, unsupported or inconsistent raster data."""


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator; identical seed gives an identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Image:
    """Planar raster: data has shape (channels, height, width), float32."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ImageError(f"expected (c, h, w) array, got shape {self.data.shape}")
        if self.data.shape[0] not in (1, 3):
            raise ImageError(f"expected 1 or 3 channels, got {self.data.shape[0]}")
        if self.data.dtype != np.float32:
            object.__setattr__(self, "data", self.data.astype(np.float32))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def copy(self) -> "Image":
        return Image(self.data.copy())

    def clamped(self) -> "Image":
        return Image(np.clip(self.data, 0.0, 1.0))


def image_from_gray(arr: np.ndarray) -> Image:
    """Wrap a 2-D array as a single-channel image (no range check)."""
    return Image(np.asarray(arr, dtype=np.float32)[None, :, :])


def _unfilter_scanlines(raw: bytes, height: int, stride: int, bpp: int) -> bytearray:
    # PNG per-scanline filters 0..4 (None/Sub/Up/Average/Paeth).
    out = bytearray(height * stride)
    pos = 0
    prev_row = bytearray(stride)
    for y in range(height):
        ftype = raw[pos]
        pos += 1
        row = bytearray(raw[pos : pos + stride])
        pos += stride
        if ftype == 1:
            for i in range(bpp, stride):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:
            for i in range(stride):
                row[i] = (row[i] + prev_row[i]) & 0xFF
        elif ftype == 3:
            for i in range(stride):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + ((left + prev_row[i]) >> 1)) & 0xFF
        elif ftype == 4:
            for i in range(stride):
                a = row[i - bpp] if i >= bpp else 0
                b = prev_row[i]
                c = prev_row[i - bpp] if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if (pa <= pb and pa <= pc) else (b if pb <= pc else c)
                row[i] = (row[i] + pred) & 0xFF
        elif ftype != 0:
            raise ImageError(f"corrupt image file: bad PNG filter type {ftype}")
        out[y * stride : (y + 1) * stride] = row
        prev_row = row
    return out


def _decode_png16(path: Path) -> np.ndarray:
    """Decode a 16-bit gray or RGB PNG to uint16 (h, w[, c]).

    Pillow silently narrows 16-bit RGB PNGs to 8 bits, so those come through
    here instead. Interlaced files are rejected.
    """
    blob = path.read_bytes()
    if blob[:8] != b"\x89PNG\r\n\x1a\n":
        raise ImageError("corrupt image file: bad PNG signature")
    pos = 8
    width = height = None
    colour = interlace = None
    idat = bytearray()
    try:
        while pos < len(blob):
            (length,) = struct.unpack(">I", blob[pos : pos + 4])
            ctype = blob[pos + 4 : pos + 8]
            data = blob[pos + 8 : pos + 8 + length]
            if len(data) != length:
                raise ImageError("corrupt image file: truncated PNG chunk")
            pos += 12 + length
            if ctype == b"IHDR":
                width, height, depth, colour, _, _, interlace = struct.unpack(">IIBBBBB", data)
                if depth != 16:
                    raise ImageError("internal: _decode_png16 called on non-16-bit file")
            elif ctype == b"IDAT":
                idat.extend(data)
            elif ctype == b"IEND":
                break
        if width is None or not idat:
            raise ImageError("corrupt image file: missing PNG chunks")
        if interlace != 0:
            raise ImageError("unsupported format: interlaced 16-bit PNG")
        if colour not in (0, 2):
            raise ImageError(f"unsupported format: 16-bit PNG colour type {colour}")
        nchan = 1 if colour == 0 else 3
        stride = width * nchan * 2
        raw = zlib.decompress(bytes(idat))
        if len(raw) != height * (stride + 1):
            raise ImageError("corrupt image file: PNG pixel data size mismatch")
        flat = _unfilter_scanlines(raw, height, stride, nchan * 2)
    except (struct.error, zlib.error) as exc:
        raise ImageError(f"corrupt image file: {exc}") from exc
    arr = np.frombuffer(bytes(flat), dtype=">u2").astype(np.uint16)
    if nchan == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, 3)


def _png_bit_depth(path: Path) -> int | None:
    try:
        with open(path, "rb") as fh:
            head = fh.read(26)
    except OSError as exc:
        raise ImageError(f"unreadable file: {path}: {exc}") from exc
    if head[:8] != b"\x89PNG\r\n\x1a\n" or len(head) < 26:
        return None
    return head[24]


def load_image(path) -> Image:
    """Load an 8/16-bit PNG or binary PPM/PGM, scaled to [0, 1].

    Samples are divided by the format maximum (255 or 65535). Grayscale
    stays single-channel; RGB stays three-channel.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageError(f"unreadable file: {path}: no such file")
    if path.read_bytes()[:8].startswith(b"\x89PNG") and _png_bit_depth(path) == 16:
        arr = _decode_png16(path)
        scale = 65535.0
    else:
        try:
            with PILImage.open(path) as im:
                if im.format not in ("PNG", "PPM"):
                    raise ImageError(f"unsupported format: {im.format or 'unknown'}")
                im.load()
                arr = np.asarray(im)
        except UnidentifiedImageError as exc:
            raise ImageError(f"corrupt image file: {path}") from exc
        except (OSError, SyntaxError) as exc:
            raise ImageError(f"corrupt image file: {path}: {exc}") from exc
        if arr.dtype == np.uint8:
            scale = 255.0
        elif arr.dtype in (np.uint16, np.int32):
            scale = 65535.0
        else:
            raise ImageError(f"unsupported bit depth: {arr.dtype}")
    if arr.ndim == 2:
        planar = arr[None, :, :]
    elif arr.ndim == 3 and arr.shape[2] == 3:
        planar = np.transpose(arr, (2, 0, 1))
    else:
        raise ImageError(f"unsupported channel layout: shape {arr.shape}")
    return Image((planar / scale).astype(np.float32))


def save_image(img: Image, path) -> None:
    """Write an 8-bit PNG; samples are clamped to [0, 1] then round(s*255)."""
    path = Path(path)
    quant = np.rint(np.clip(img.data, 0.0, 1.0) * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = PILImage.fromarray(quant[0], mode="L")
    else:
        pil = PILImage.fromarray(np.transpose(quant, (1, 2, 0)), mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise ImageError(f"cannot write {path}: {exc}") from exc


def extract_patches(img: Image, size: int, stride: int, rng: np.random.Generator, count: int) -> list[Image]:
    """Sample `count` size×size patches at uniform stride-aligned offsets."""
    if size > min(img.height, img.width):
        raise ImageError(f"patch size {size} exceeds image {img.width}x{img.height}")
    if stride < 1 or count < 0:
        raise ImageError("stride must be >= 1 and count >= 0")
    ys = np.arange(0, img.height - size + 1, stride)
    xs = np.arange(0, img.width - size + 1, stride)
    patches = []
    for _ in range(count):
        y = int(rng.choice(ys))
        x = int(rng.choice(xs))
        patches.append(Image(img.data[:, y : y + size, x : x + size].copy()))
    return patches
