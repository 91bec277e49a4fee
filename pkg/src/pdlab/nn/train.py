"""Joint training of the estimator and conditional denoiser on synthetic
patches: composite objective alpha*L_e + beta*L_b + gamma*L_nb with the blind
term backpropagating through the estimator. Deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..image import make_rng
from ..noise import add_awgn, add_mixed, add_rvin
from ..synthdata import synthetic_scene
from .checkpoint import save_checkpoint
from .losses import LossWeights, loss_blind, loss_estimation, loss_nonblind, loss_total
from .model import BlindDenoiser, ModelConfig
from .optim import Adam


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    steps: int = 200
    batch: int = 16
    patch: int = 25
    lr: float = 1e-3
    lr_drop_frac: float = 0.6  # mirrors the 30-of-50-epoch drop to lr/10
    seed: int = 0
    noise_mix: str = "paper"  # "paper": singles and mixed 1:1; "awgn": AWGN only
    sigma_range: tuple = (0.0, 75.0)
    ratio_range: tuple = (0.0, 0.3)
    smooth_window: int = 20
    weights: LossWeights = field(default_factory=LossWeights)
    model: ModelConfig = field(default_factory=lambda: ModelConfig(est_layers=3, den_layers=6))
    scene_bank: int = 24
    scene_size: int = 96


@dataclass
class TrainResult:
    model: BlindDenoiser
    losses: list
    smoothed: list
    terms: list  # per-step (L_e, L_b, L_nb)


def _sample_batch(cfg: TrainConfig, scenes, rng):
    ys, vs, es = [], [], []
    for _ in range(cfg.batch):
        scene = scenes[int(rng.integers(len(scenes)))]
        y0 = int(rng.integers(scene.height - cfg.patch + 1))
        x0 = int(rng.integers(scene.width - cfg.patch + 1))
        from ..image import Image

        clean = Image(scene.data[:, y0 : y0 + cfg.patch, x0 : x0 + cfg.patch].copy())
        sigma = float(rng.uniform(*cfg.sigma_range))
        ratio = float(rng.uniform(*cfg.ratio_range))
        if cfg.noise_mix == "awgn":
            noisy, nmap = add_awgn(clean, sigma, rng)
        else:
            u = rng.random()
            if u < 0.25:
                noisy, nmap = add_awgn(clean, sigma, rng)
            elif u < 0.5:
                noisy, nmap = add_rvin(clean, ratio, rng)
            else:
                noisy, nmap = add_mixed(clean, sigma, ratio, rng)
        ys.append(noisy.data)
        vs.append(noisy.data - clean.data)
        es.append(nmap.data)
    return (
        np.stack(ys).astype(np.float32),
        np.stack(vs).astype(np.float32),
        np.stack(es).astype(np.float32),
    )


def train(cfg: TrainConfig, checkpoint_path=None) -> TrainResult:
    rng = make_rng(cfg.seed)
    scenes = [
        synthetic_scene(rng, cfg.scene_size, cfg.scene_size, channels=3)
        for _ in range(cfg.scene_bank)
    ]
    model = BlindDenoiser(cfg.model, rng)
    opt = Adam(model.parameters(), lr=cfg.lr)
    drop_at = int(cfg.steps * cfg.lr_drop_frac)
    w = cfg.weights

    losses, smoothed, terms = [], [], []
    for step in range(cfg.steps):
        if step == drop_at:
            opt.lr = cfg.lr * 0.1
        y, v, e = _sample_batch(cfg, scenes, rng)

        e_hat, est_cache = model.forward_estimator(y)
        l_e, g_e = loss_estimation(e_hat, e)
        v_b, cache_b = model.forward_denoiser(y, e_hat)
        l_b, g_vb = loss_blind(v_b, v)
        v_nb, cache_nb = model.forward_denoiser(y, e)
        l_nb, g_vnb = loss_nonblind(v_nb, v)
        total = loss_total(l_e, l_b, l_nb, w)
        if not np.isfinite(total):
            raise TrainingDiverged(
                f"loss became {total} at step {step} "
                f"(L_e={l_e:.4g}, L_b={l_b:.4g}, L_nb={l_nb:.4g})"
            )

        model.zero_grad()
        _, g_map = model.backward_denoiser(cache_b, (w.beta * g_vb).astype(y.dtype))
        model.backward_denoiser(cache_nb, (w.gamma * g_vnb).astype(y.dtype))
        model.backward_estimator(est_cache, (w.alpha * g_e).astype(y.dtype) + g_map)
        opt.step()

        losses.append(total)
        terms.append((l_e, l_b, l_nb))
        lo = max(0, len(losses) - cfg.smooth_window)
        smoothed.append(float(np.mean(losses[lo:])))

    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, model, cfg.seed, cfg.steps)
    return TrainResult(model, losses, smoothed, terms)
