"""Multi-hot to single-class reduction and back to one-hot."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from emopipe.corpus import NUM_EMOTIONS, Dataset, Emotion, LabelVector, Sample
from emopipe.errors import ContractError, NeutralLabelError

TIE_BREAK = "lowest_ordinal"


class NeutralPolicy(str, enum.Enum):
    DROP = "drop"
    ERROR = "error"


def lowest_ordinal(active: tuple[Emotion, ...]) -> Emotion:
    return min(active)


# Swappable: any callable mapping the non-empty tuple of active emotions to one.
TieBreak = Callable[[tuple[Emotion, ...]], Emotion]


def to_dominant(labels: LabelVector, tie_break: TieBreak = lowest_ordinal) -> Emotion:
    """Pick the single emotion that represents ``labels``.

    Raises:
        NeutralLabelError: no flag is set.
    """
    active = labels.active
    if not active:
        raise NeutralLabelError("all-zero label vector has no dominant emotion")
    return tie_break(active)


def to_one_hot(label: Emotion | int) -> LabelVector:
    ordinal = int(label)
    if not 0 <= ordinal < NUM_EMOTIONS:
        raise ContractError(f"emotion ordinal out of range: {ordinal}")
    return LabelVector.of(ordinal)


def argmax_emotion(scores) -> Emotion:
    """Highest-scoring class; exact ties go to the lowest ordinal."""
    scores = np.asarray(scores)
    if scores.shape != (NUM_EMOTIONS,):
        raise ContractError(f"expected {NUM_EMOTIONS} class scores, got shape {scores.shape}")
    return Emotion(int(np.argmax(scores)))


def argmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise :func:`argmax_emotion` for an ``(n, 6)`` score matrix."""
    scores = np.asarray(scores)
    if scores.ndim != 2 or scores.shape[1] != NUM_EMOTIONS:
        raise ContractError(f"expected (n, {NUM_EMOTIONS}) scores, got shape {scores.shape}")
    # np.argmax returns the first maximal index, i.e. the lowest ordinal on ties
    return np.argmax(scores, axis=1).astype(np.int64)


@dataclass(frozen=True)
class Reduction:
    reduced: tuple[tuple[Sample, Emotion], ...]
    dropped: tuple[Sample, ...]
    # multi-hot rows whose non-dominant flags were thrown away
    discarded_secondary_rows: int
    discarded_secondary_labels: int
    policy: NeutralPolicy

    def manifest(self) -> dict[str, str]:
        return {
            "tie_break": TIE_BREAK,
            "neutral_policy": self.policy.value,
            "dropped_neutral_rows": str(len(self.dropped)),
            "discarded_secondary_rows": str(self.discarded_secondary_rows),
            "discarded_secondary_labels": str(self.discarded_secondary_labels),
        }

    def __iter__(self):
        # unpacks as (reduced, dropped)
        return iter((self.reduced, self.dropped))


def reduce_dataset(
    dataset: Dataset,
    policy: NeutralPolicy | str = NeutralPolicy.DROP,
    tie_break: TieBreak = lowest_ordinal,
) -> Reduction:
    """Map every labeled sample to its dominant emotion.

    Under ``drop`` neutral rows go to ``dropped``; under ``error`` their
    presence raises :class:`NeutralLabelError` listing every offending id.
    Order of ``reduced`` follows the dataset.
    """
    policy = NeutralPolicy(policy)
    if not dataset.labeled:
        raise ContractError(f"split {dataset.split_name!r} is unlabeled; cannot reduce")

    neutral_ids = tuple(s.id for s in dataset.samples if s.labels.is_neutral())
    if neutral_ids and policy is NeutralPolicy.ERROR:
        raise NeutralLabelError(
            f"{len(neutral_ids)} neutral row(s) in {dataset.split_name!r}: ids={','.join(neutral_ids)}",
            ids=neutral_ids,
        )

    reduced: list[tuple[Sample, Emotion]] = []
    dropped: list[Sample] = []
    multi_rows = extra_labels = 0
    for s in dataset.samples:
        if s.labels.is_neutral():
            dropped.append(s)
            continue
        n = s.labels.popcount
        if n > 1:
            multi_rows += 1
            extra_labels += n - 1
        reduced.append((s, to_dominant(s.labels, tie_break)))
    return Reduction(
        reduced=tuple(reduced),
        dropped=tuple(dropped),
        discarded_secondary_rows=multi_rows,
        discarded_secondary_labels=extra_labels,
        policy=policy,
    )
