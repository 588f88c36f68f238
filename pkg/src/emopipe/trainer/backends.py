"""Classifier backend interface and the NumPy reference implementation."""
from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from emopipe.corpus import NUM_EMOTIONS
from emopipe.errors import CheckpointError, ConfigError
from emopipe.trainer.optim import AdamW, OptimizerSettings, clip_by_global_norm

Snapshot = dict[str, np.ndarray]


@runtime_checkable
class ClassifierBackend(Protocol):
    """What the trainer and the inference code need from a six-way classifier.

    ``compute_gradients`` may return backend-private gradient handles; the
    trainer only passes them back into ``apply_update``.
    """

    num_labels: int

    def set_mixed_precision(self, enabled: bool) -> None: ...

    def forward(self, token_ids: np.ndarray, attention_mask: np.ndarray) -> np.ndarray: ...

    def compute_gradients(
        self, token_ids: np.ndarray, attention_mask: np.ndarray, labels: np.ndarray
    ) -> tuple[float, object]: ...

    def configure_optimizer(self, settings: OptimizerSettings) -> None: ...

    def apply_update(self, gradients: object, lr: float) -> None: ...

    def snapshot(self) -> Snapshot: ...

    def restore(self, snapshot: Snapshot) -> None: ...

    def fingerprint(self) -> str: ...

    def describe(self) -> dict[str, str]: ...


def log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(scores: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(np.asarray(scores, dtype=np.float64)))


def cross_entropy(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of ``labels`` under softmax(``scores``)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        return 0.0
    return float(-log_softmax(scores)[np.arange(len(labels)), labels].mean())


class ReferenceBackend:
    """Mean-pooled token embeddings followed by a linear six-way head.

    All master parameters are float64. Mixed precision runs the forward and
    backward passes in float16 with the loss in float32, then casts the
    gradients back; the default full-precision mode is what golden tests use.
    """

    kind = "reference"
    _NO_DECAY = ("bias",)

    def __init__(self, vocab_size: int = 4096, dim: int = 32, seed: int = 0, init_scale: float = 0.1):
        if vocab_size < 1 or dim < 1:
            raise ConfigError(f"vocab_size and dim must be positive, got {vocab_size}, {dim}")
        self.num_labels = NUM_EMOTIONS
        self.vocab_size = vocab_size
        self.dim = dim
        self.seed = seed
        self.init_scale = init_scale
        rng = np.random.default_rng(seed)
        self.params: Snapshot = {
            "embedding": rng.normal(0.0, init_scale, size=(vocab_size, dim)),
            "weight": rng.normal(0.0, init_scale, size=(dim, NUM_EMOTIONS)),
            "bias": np.zeros(NUM_EMOTIONS),
        }
        self.mixed_precision = False
        self._optimizer = AdamW(OptimizerSettings(), no_decay=self._NO_DECAY)

    @property
    def _dtype(self):
        return np.float16 if self.mixed_precision else np.float64

    def set_mixed_precision(self, enabled: bool) -> None:
        self.mixed_precision = bool(enabled)

    def _pool(self, token_ids: np.ndarray, attention_mask: np.ndarray):
        ids = np.asarray(token_ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise ConfigError(f"token id out of range for vocab_size={self.vocab_size}")
        dt = self._dtype
        mask = np.asarray(attention_mask, dtype=dt)
        counts = np.maximum(mask.sum(axis=1, keepdims=True), 1).astype(dt, copy=False)
        emb = self.params["embedding"].astype(dt, copy=False)[ids]
        pooled = (emb * mask[:, :, None]).sum(axis=1) / counts
        return ids, mask, counts, pooled

    def forward(self, token_ids: np.ndarray, attention_mask: np.ndarray) -> np.ndarray:
        _, _, _, pooled = self._pool(token_ids, attention_mask)
        dt = self._dtype
        # explicit per-row reduction: scores never depend on batch composition
        scores = (pooled[:, :, None] * self.params["weight"].astype(dt, copy=False)[None]).sum(axis=1)
        scores = scores + self.params["bias"].astype(dt, copy=False)
        return scores.astype(np.float64)

    def compute_gradients(
        self, token_ids: np.ndarray, attention_mask: np.ndarray, labels: np.ndarray
    ) -> tuple[float, Snapshot]:
        ids, mask, counts, pooled = self._pool(token_ids, attention_mask)
        dt = self._dtype
        labels = np.asarray(labels, dtype=np.int64)
        n = len(labels)
        weight = self.params["weight"].astype(dt, copy=False)
        scores = pooled @ weight + self.params["bias"].astype(dt, copy=False)
        loss_dt = np.float32 if self.mixed_precision else np.float64
        logp = log_softmax(scores.astype(loss_dt))
        loss = float(-logp[np.arange(n), labels].mean())

        d_scores = np.exp(logp)
        d_scores[np.arange(n), labels] -= 1.0
        d_scores = (d_scores / n).astype(dt, copy=False)
        d_weight = pooled.T @ d_scores
        d_bias = d_scores.sum(axis=0)
        d_pooled = d_scores @ weight.T
        # each real token receives d_pooled / count of its row
        per_token = (d_pooled / counts)[:, None, :] * mask[:, :, None]
        d_embedding = np.zeros_like(self.params["embedding"])
        np.add.at(d_embedding, ids.reshape(-1), per_token.reshape(-1, self.dim).astype(np.float64))
        grads = {
            "embedding": d_embedding,
            "weight": d_weight.astype(np.float64),
            "bias": d_bias.astype(np.float64),
        }
        return loss, grads

    def configure_optimizer(self, settings: OptimizerSettings) -> None:
        self._optimizer = AdamW(settings, no_decay=self._NO_DECAY)

    def apply_update(self, gradients: Snapshot, lr: float) -> None:
        grads, _ = clip_by_global_norm(gradients, self._optimizer.settings.max_grad_norm)
        self._optimizer.step(self.params, grads, lr)

    def snapshot(self) -> Snapshot:
        return {k: v.copy() for k, v in self.params.items()}

    def restore(self, snapshot: Snapshot) -> None:
        for name, value in self.params.items():
            if name not in snapshot:
                raise CheckpointError(f"snapshot lacks parameter {name!r}")
            if snapshot[name].shape != value.shape:
                raise CheckpointError(
                    f"parameter {name!r}: snapshot shape {snapshot[name].shape} != backend {value.shape}"
                )
        self.params = {k: np.array(snapshot[k], dtype=np.float64, copy=True) for k in self.params}

    def fingerprint(self) -> str:
        return f"reference/1:vocab={self.vocab_size}:dim={self.dim}:labels={self.num_labels}"

    def describe(self) -> dict[str, str]:
        return {
            "kind": self.kind,
            "vocab_size": str(self.vocab_size),
            "dim": str(self.dim),
            "seed": str(self.seed),
        }
