"""Training objectives: three quadratic terms and their weighted sum.

Each term is sum_i ||pred_i - target_i||_F^2 / (2N) over a batch of N items;
the matching gradient w.r.t. the prediction is (pred - target) / N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("loss weights must be non-negative")


def quadratic_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    n = pred.shape[0]
    diff = pred - target
    loss = float(np.sum(diff.astype(np.float64) ** 2)) / (2 * n)
    return loss, diff / n


def loss_estimation(e_hat, e_true):
    """Map estimation loss (estimator output vs ground-truth maps)."""
    return quadratic_loss(e_hat, e_true)


def loss_blind(v_hat_blind, v_true):
    """Residual loss with the estimator's own map as conditioning."""
    return quadratic_loss(v_hat_blind, v_true)


def loss_nonblind(v_hat_nonblind, v_true):
    """Residual loss with ground-truth map conditioning."""
    return quadratic_loss(v_hat_nonblind, v_true)


def loss_total(l_e: float, l_b: float, l_nb: float, w: LossWeights) -> float:
    return w.alpha * l_e + w.beta * l_b + w.gamma * l_nb
