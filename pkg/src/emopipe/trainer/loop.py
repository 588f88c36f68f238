"""Mini-batch fine-tuning with per-epoch validation and best-epoch selection."""
from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from emopipe.corpus import NUM_EMOTIONS
from emopipe.encode import DEFAULT_BUDGET, FeatureSet
from emopipe.errors import ConfigError, ContractError, TrainingDivergedError
from emopipe.labelspace import argmax_rows
from emopipe.metrics import Averaging, report
from emopipe.trainer.backends import ClassifierBackend, Snapshot, cross_entropy
from emopipe.trainer.optim import OptimizerSettings
from emopipe.trainer.schedule import warmup_lr

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = (
    "epoch",
    "train_loss",
    "val_loss",
    "val_accuracy",
    "val_precision",
    "val_recall",
    "val_f1",
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-5
    batch_size: int = 8
    epochs: int = 5
    warmup_steps: int = 500
    sequence_budget: int = DEFAULT_BUDGET
    mixed_precision: bool = True
    seed: int = 42
    weight_decay: float = 0.01
    max_grad_norm: float = 1.0
    num_labels: int = NUM_EMOTIONS

    def __post_init__(self) -> None:
        if self.num_labels != NUM_EMOTIONS:
            raise ConfigError(f"num_labels is fixed at {NUM_EMOTIONS}, got {self.num_labels}")
        for name in ("learning_rate", "batch_size", "epochs", "warmup_steps", "max_grad_norm"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.sequence_budget < 2:
            raise ConfigError(f"sequence_budget must be >= 2, got {self.sequence_budget}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")

    def optimizer_settings(self) -> OptimizerSettings:
        return OptimizerSettings(weight_decay=self.weight_decay, max_grad_norm=self.max_grad_norm)

    def as_record(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def config_hash(self) -> str:
        text = "".join(f"{k}={v}\n" for k, v in sorted(self.as_record().items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    val_precision: float
    val_recall: float
    val_f1: float

    def as_row(self) -> list[str]:
        return [str(self.epoch)] + [repr(float(getattr(self, c))) for c in HISTORY_COLUMNS[1:]]


@dataclass
class TrainingResult:
    history: list[EpochLog]
    best_epoch: int
    best_checkpoint: Snapshot = field(repr=False)
    config: TrainConfig | None = None
    steps: int = 0

    @property
    def best(self) -> EpochLog:
        return self.history[self.best_epoch - 1]


def select_best(history: Sequence[EpochLog] | Sequence[float]) -> int:
    """1-based index of the highest validation accuracy; earliest wins ties."""
    if len(history) == 0:
        raise ContractError("cannot select a best epoch from an empty history")
    accs = [h.val_accuracy if isinstance(h, EpochLog) else float(h) for h in history]
    best = 0
    for i, a in enumerate(accs):
        if a > accs[best]:
            best = i
    return best + 1


def epoch_permutation(seed: int, epoch: int, n: int) -> np.ndarray:
    """Shuffle order for one epoch, from a counter-based generator keyed on (seed, epoch)."""
    bitgen = np.random.Philox(np.random.SeedSequence([seed, epoch]))
    return np.random.Generator(bitgen).permutation(n)


def predict_scores(backend: ClassifierBackend, features: FeatureSet, batch_size: int = 64) -> np.ndarray:
    """Raw class scores, shape ``(n, 6)``, in record order."""
    n = len(features)
    out = np.zeros((n, NUM_EMOTIONS), dtype=np.float64)
    for start in range(0, n, batch_size):
        sl = slice(start, start + batch_size)
        out[sl] = backend.forward(features.token_ids[sl], features.attention_mask[sl])
    return out


@dataclass(frozen=True)
class Evaluation:
    loss: float
    predictions: np.ndarray
    scores: np.ndarray


def evaluate(backend: ClassifierBackend, features: FeatureSet, batch_size: int = 64) -> Evaluation:
    scores = predict_scores(backend, features, batch_size)
    loss = cross_entropy(scores, features.labels) if features.labeled else float("nan")
    return Evaluation(loss=loss, predictions=argmax_rows(scores), scores=scores)


def _check_split(features: FeatureSet, name: str, budget: int) -> None:
    if len(features) == 0:
        raise ContractError(f"{name} split is empty")
    if not features.labeled:
        raise ContractError(f"{name} split has unlabeled records")
    if features.sequence_budget != budget:
        raise ContractError(
            f"{name} split was encoded with budget {features.sequence_budget}, config says {budget}"
        )


def train(
    config: TrainConfig,
    train_set: FeatureSet,
    val_set: FeatureSet,
    backend: ClassifierBackend,
    averaging: Averaging | str = Averaging.MACRO_ALL,
    on_epoch: Callable[[EpochLog], None] | None = None,
) -> TrainingResult:
    """Fine-tune ``backend`` and leave it holding the best epoch's weights.

    Each epoch visits the training records in a fresh seeded order, keeping
    the final partial batch. After every epoch the validation split is scored
    and the snapshot is kept if its accuracy beats every earlier epoch.

    Raises:
        ContractError: a split is empty, unlabeled, or has the wrong budget.
        TrainingDivergedError: a batch produced a non-finite loss.
    """
    _check_split(train_set, "train", config.sequence_budget)
    _check_split(val_set, "validation", config.sequence_budget)

    backend.set_mixed_precision(config.mixed_precision)
    backend.configure_optimizer(config.optimizer_settings())

    n = len(train_set)
    history: list[EpochLog] = []
    best_snapshot: Snapshot | None = None
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = epoch_permutation(config.seed, epoch, n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = backend.compute_gradients(
                train_set.token_ids[idx], train_set.attention_mask[idx], train_set.labels[idx]
            )
            if not math.isfinite(loss):
                ids = ",".join(train_set.ids[i] for i in idx)
                raise TrainingDivergedError(
                    f"non-finite loss {loss} at step {step} (epoch {epoch}); batch ids: {ids}"
                )
            backend.apply_update(grads, warmup_lr(step, config.learning_rate, config.warmup_steps))
            step += 1
            loss_sum += loss * len(idx)

        ev = evaluate(backend, val_set)
        rep = report(val_set.labels, ev.predictions, averaging)
        log = EpochLog(
            epoch=epoch,
            train_loss=loss_sum / n,
            val_loss=ev.loss,
            val_accuracy=rep.accuracy,
            val_precision=rep.macro_precision,
            val_recall=rep.macro_recall,
            val_f1=rep.macro_f1,
        )
        if not history or log.val_accuracy > max(h.val_accuracy for h in history):
            best_snapshot = backend.snapshot()
        history.append(log)
        logger.info(
            "epoch %d: train_loss=%.4f val_loss=%.4f val_acc=%.4f val_f1=%.4f",
            epoch, log.train_loss, log.val_loss, log.val_accuracy, log.val_f1,
        )
        if on_epoch is not None:
            on_epoch(log)

    best_epoch = select_best(history)
    backend.restore(best_snapshot)
    return TrainingResult(
        history=history, best_epoch=best_epoch, best_checkpoint=best_snapshot, config=config, steps=step
    )


def history_to_csv(history: Sequence[EpochLog]) -> str:
    lines = [",".join(HISTORY_COLUMNS)]
    lines += [",".join(h.as_row()) for h in history]
    return "\n".join(lines) + "\n"


def history_from_csv(text: str) -> list[EpochLog]:
    rows = [line.split(",") for line in text.splitlines() if line.strip()]
    if not rows or tuple(c.strip() for c in rows[0]) != HISTORY_COLUMNS:
        raise ContractError(f"history header must be {','.join(HISTORY_COLUMNS)}")
    out = []
    for row in rows[1:]:
        if len(row) != len(HISTORY_COLUMNS):
            raise ContractError(f"history row has {len(row)} fields, expected {len(HISTORY_COLUMNS)}")
        out.append(EpochLog(int(row[0]), *(float(x) for x in row[1:])))
    return out


def format_history(history: Sequence[EpochLog]) -> str:
    head = f"{'epoch':>5} {'train_loss':>10} {'val_loss':>9} {'val_acc':>8} {'val_prec':>8} {'val_rec':>8} {'val_f1':>8}"
    lines = [head]
    for h in history:
        lines.append(
            f"{h.epoch:>5d} {h.train_loss:>10.4f} {h.val_loss:>9.4f} {h.val_accuracy:>8.4f} "
            f"{h.val_precision:>8.4f} {h.val_recall:>8.4f} {h.val_f1:>8.4f}"
        )
    return "\n".join(lines) + "\n"
