"""NumPy AdamW and global-norm gradient clipping for the reference backend.

Update arithmetic follows ``torch.optim.AdamW`` (decoupled decay applied
before the moment step, bias-corrected denominator) and clipping follows
``torch.nn.utils.clip_grad_norm_``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class OptimizerSettings:
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_grad_norm: float = 1.0


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(np.square(g))) for g in grads.values()))


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> tuple[dict[str, np.ndarray], float]:
    """Scale ``grads`` so their joint L2 norm is at most ``max_norm``.

    Returns the (possibly scaled) gradients and the norm before clipping.
    """
    norm = global_norm(grads)
    coef = max_norm / (norm + 1e-6)
    if coef < 1.0:
        grads = {k: g * coef for k, g in grads.items()}
    return grads, norm


class AdamW:
    def __init__(self, settings: OptimizerSettings, no_decay: Iterable[str] = ()):
        self.settings = settings
        self.no_decay = frozenset(no_decay)
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        """Update ``params`` in place."""
        s = self.settings
        self.t += 1
        bc1 = 1.0 - s.beta1 ** self.t
        bc2 = 1.0 - s.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            if s.weight_decay and name not in self.no_decay:
                p *= 1.0 - lr * s.weight_decay
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            denom = np.sqrt(v) / math.sqrt(bc2) + s.eps
            p -= (lr / bc1) * m / denom
