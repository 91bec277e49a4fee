"""Checkpoint format: magic "PDNN1", u32 header length, JSON header
(config, layer shapes, seed, step), then all parameters as one little-endian
float32 blob in declaration order."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..image import make_rng
from .model import BlindDenoiser, ModelConfig

_MAGIC = b"PDNN1"


def save_checkpoint(path, model: BlindDenoiser, seed: int, step: int) -> None:
    params = model.parameters()
    header = {
        "config": model.config.to_json(),
        "shapes": [list(p.shape) for p in params],
        "seed": seed,
        "step": step,
    }
    payload = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        for p in params:
            fh.write(p.data.astype("<f4").tobytes())


def load_checkpoint(path) -> tuple[BlindDenoiser, dict]:
    blob = Path(path).read_bytes()
    if blob[:5] != _MAGIC:
        raise ValueError(f"not a model checkpoint: {path}")
    (hlen,) = struct.unpack("<I", blob[5:9])
    header = json.loads(blob[9 : 9 + hlen])
    config = ModelConfig(**header["config"])
    model = BlindDenoiser(config, make_rng(0))
    offset = 9 + hlen
    for p, shape in zip(model.parameters(), header["shapes"]):
        if list(p.shape) != shape:
            raise ValueError(f"checkpoint shape mismatch: {shape} vs {list(p.shape)}")
        n = int(np.prod(shape))
        arr = np.frombuffer(blob[offset : offset + 4 * n], dtype="<f4")
        if arr.size != n:
            raise ValueError("checkpoint parameter blob truncated")
        p.data = arr.reshape(shape).astype(np.float32)
        p.grad = np.zeros_like(p.data)
        offset += 4 * n
    return model, header
