"""Estimator and conditional denoiser networks, DnCNN-style at toy scale.

Both are plain conv+ReLU stacks with 3x3 same-size kernels and a linear last
layer; the estimator appends a hard clamp to [0, 1]. The denoiser consumes
the noisy image concatenated with a six-channel noise map (9 input channels)
and predicts the noise residual, so the denoised image is input minus
prediction. Forward passes return explicit caches so the same parameters can
run several passes per step (blind and non-blind) before one backward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..image import Image
from ..noise import NoiseMap
from .conv import conv2d_backward, conv2d_forward
from .tensor import Tensor

MAP_CHANNELS = 6
IMG_CHANNELS = 3


@dataclass
class ModelConfig:
    est_layers: int = 5
    den_layers: int = 20
    channels: int = 16
    kernel: int = 3
    residual_output: bool = True

    def __post_init__(self):
        if self.est_layers < 2 or self.den_layers < 2:
            raise ValueError("estimator and denoiser need at least 2 layers")

    def to_json(self) -> dict:
        return {
            "est_layers": self.est_layers,
            "den_layers": self.den_layers,
            "channels": self.channels,
            "kernel": self.kernel,
            "residual_output": self.residual_output,
        }


class Conv:
    def __init__(self, cin, cout, kernel, rng, dtype=np.float32):
        limit = np.sqrt(6.0 / (cin * kernel * kernel))  # He-style fan-in scaling
        w = rng.uniform(-limit, limit, size=(cout, cin, kernel, kernel))
        self.w = Tensor(w.astype(dtype))
        self.b = Tensor(np.zeros(cout, dtype=dtype))
        self.pad = kernel // 2

    def forward(self, x):
        out, cols = conv2d_forward(x, self.w.data, self.b.data, self.pad, return_cols=True)
        return out, (x, cols)

    def backward(self, cache, gout):
        x, cols = cache
        gx, gw, gb = conv2d_backward(gout, x, self.w.data, self.pad, cols=cols)
        self.w.grad += gw
        self.b.grad += gb
        return gx

    def params(self):
        return [self.w, self.b]


class ReLU:
    def forward(self, x):
        mask = x > 0
        return x * mask, mask

    def backward(self, cache, gout):
        return gout * cache

    def params(self):
        return []


class Clamp01:
    """Hard clamp; gradient passes only strictly inside the interval."""

    def forward(self, x):
        mask = (x > 0) & (x < 1)
        return np.clip(x, 0.0, 1.0), mask

    def backward(self, cache, gout):
        return gout * cache

    def params(self):
        return []


class Stack:
    def __init__(self, layers):
        self.layers = layers

    def forward(self, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, caches, gout):
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            gout = layer.backward(cache, gout)
        return gout

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out


def _conv_stack(cin, cout, n_layers, width, kernel, rng, dtype, clamp):
    layers = [Conv(cin, width, kernel, rng, dtype), ReLU()]
    for _ in range(n_layers - 2):
        layers += [Conv(width, width, kernel, rng, dtype), ReLU()]
    layers.append(Conv(width, cout, kernel, rng, dtype))
    if clamp:
        layers.append(Clamp01())
    return Stack(layers)


class BlindDenoiser:
    """Estimator E (3 -> 6 maps, clamped) plus conditional denoiser R (9 -> 3)."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator, dtype=np.float32):
        self.config = config
        self.estimator = _conv_stack(
            IMG_CHANNELS, MAP_CHANNELS, config.est_layers, config.channels,
            config.kernel, rng, dtype, clamp=True,
        )
        self.denoiser = _conv_stack(
            IMG_CHANNELS + MAP_CHANNELS, IMG_CHANNELS, config.den_layers,
            config.channels, config.kernel, rng, dtype, clamp=False,
        )

    def parameters(self):
        return self.estimator.params() + self.denoiser.params()

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward_estimator(self, y):
        """y: (n, 3, h, w) -> estimated maps (n, 6, h, w) in [0, 1], plus cache."""
        return self.estimator.forward(y)

    def forward_denoiser(self, y, emap):
        """Residual prediction conditioned on a map; returns (v_hat, cache)."""
        x = np.concatenate([y, emap], axis=1)
        return self.denoiser.forward(x)

    def backward_denoiser(self, cache, gout):
        """Returns gradient w.r.t. the 9-channel input, split (g_y, g_map)."""
        gin = self.denoiser.backward(cache, gout)
        return gin[:, :IMG_CHANNELS], gin[:, IMG_CHANNELS:]

    def backward_estimator(self, cache, gout):
        return self.estimator.backward(cache, gout)

    def denoise(self, y, emap):
        """Denoised batch: y minus predicted residual."""
        v_hat, _ = self.forward_denoiser(y, emap)
        return y - v_hat


def _to_batch(img: Image) -> np.ndarray:
    data = img.data
    if data.shape[0] == 1:
        data = np.repeat(data, 3, axis=0)
    return data[None].astype(np.float32)


def run_estimator(model: BlindDenoiser, img: Image) -> NoiseMap:
    e_hat, _ = model.forward_estimator(_to_batch(img))
    return NoiseMap(e_hat[0].astype(np.float32))


def run_denoiser(model: BlindDenoiser, img: Image, nmap: NoiseMap) -> Image:
    batch = _to_batch(img)
    out = model.denoise(batch, nmap.data[None].astype(np.float32))[0]
    if img.channels == 1:
        out = out.mean(axis=0, keepdims=True)
    return Image(np.clip(out, 0.0, 1.0).astype(np.float32))
