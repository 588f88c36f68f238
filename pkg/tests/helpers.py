from __future__ import annotations

import numpy as np

from emopipe.encode import FeatureSet, HashTokenizer, encode_dataset
from emopipe.labelspace import reduce_dataset
from emopipe.synthetic import separable_corpus
from emopipe.textnorm import preprocess_dataset
from emopipe.trainer import TrainConfig

# Desk-scale schedule for a randomly initialised model; the default lr/warmup
# targets a pretrained encoder and barely moves the reference backend.
DESK_CONFIG = TrainConfig(learning_rate=0.05, warmup_steps=10, epochs=5, batch_size=8, mixed_precision=False, seed=7)


def separable_features(per_class: int = 10, seed: int = 0, split: str = "train", tokenizer=None, budget: int = 128):
    tokenizer = tokenizer or HashTokenizer()
    ds = preprocess_dataset(separable_corpus(per_class, seed=seed, split_name=split))
    return encode_dataset(reduce_dataset(ds).reduced, tokenizer, budget)


def scripted_sets(n_train=8, n_val=10):
    """Tiny train/validation sets whose first token id is the row index."""

    def fs(n, label):
        ids = np.zeros((n, 4), dtype=np.int64)
        ids[:, 0] = np.arange(n)
        return FeatureSet(ids, np.ones((n, 4), dtype=np.int8), np.full(n, label), tuple(f"r{i}" for i in range(n)), 4)

    return fs(n_train, 1), fs(n_val, 0)


class ScriptedBackend:
    """Backend whose validation accuracy per epoch follows a fixed script.

    Every record's first token id is its row index; the backend predicts
    class 0 for the first ``round(acc * n)`` rows and class 1 elsewhere.
    State is the number of updates applied.
    """

    num_labels = 6

    def __init__(self, accuracies, updates_per_epoch: int, n_val: int, loss: float = 1.0):
        self.accuracies = list(accuracies)
        self.updates_per_epoch = updates_per_epoch
        self.n_val = n_val
        self.loss = loss
        self.updates = 0

    def set_mixed_precision(self, enabled):
        pass

    def configure_optimizer(self, settings):
        pass

    def forward(self, token_ids, attention_mask):
        epoch = self.updates // self.updates_per_epoch
        correct = round(self.accuracies[epoch - 1] * self.n_val)
        scores = np.zeros((len(token_ids), 6))
        for i, row in enumerate(np.asarray(token_ids)):
            scores[i, 0 if row[0] < correct else 1] = 1.0
        return scores

    def compute_gradients(self, token_ids, attention_mask, labels):
        return self.loss, None

    def apply_update(self, gradients, lr):
        self.updates += 1

    def snapshot(self):
        return {"updates": np.array([self.updates])}

    def restore(self, snapshot):
        self.updates = int(snapshot["updates"][0])

    def fingerprint(self):
        return "scripted"

    def describe(self):
        return {"kind": "scripted"}
