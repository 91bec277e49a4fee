"""Minimal parameter container for the hand-rolled network."""

from __future__ import annotations

import numpy as np


class Tensor:
    """An n-d float array plus an optional same-shape gradient buffer."""

    __slots__ = ("data", "grad")

    def __init__(self, data: np.ndarray, with_grad: bool = True):
        self.data = np.asarray(data)
        self.grad = np.zeros_like(self.data) if with_grad else None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0
