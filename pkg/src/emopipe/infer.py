"""Prediction with a restored classifier and submission-file export."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from emopipe.corpus import EMOTION_NAMES, ID_COLUMN, TEXT_COLUMN, CsvRowWriter, Dataset, Emotion
from emopipe.encode import DEFAULT_BUDGET, TokenizerBackend, encode_text, encode_unlabeled
from emopipe.errors import ContractError
from emopipe.labelspace import argmax_emotion, argmax_rows, to_one_hot
from emopipe.textnorm import normalize_text, preprocess_dataset
from emopipe.trainer.backends import ClassifierBackend, softmax
from emopipe.trainer.loop import predict_scores


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    emotion: Emotion
    scores: tuple[float, ...]

    def probabilities(self) -> tuple[float, ...]:
        """Softmax of the raw scores, for display only."""
        return tuple(float(p) for p in softmax(np.asarray(self.scores)[None, :])[0])

    def describe(self) -> str:
        probs = self.probabilities()
        ranked = sorted(range(len(probs)), key=lambda k: (-probs[k], k))
        top = ", ".join(f"{EMOTION_NAMES[k]}={probs[k]:.3f}" for k in ranked[:3])
        return f"{self.sample_id}: {self.emotion.label} ({top})"


def predict_one(
    text: str,
    backend: ClassifierBackend,
    tokenizer: TokenizerBackend,
    budget: int = DEFAULT_BUDGET,
    sample_id: str = "",
) -> Prediction:
    """Normalize, encode and classify one raw text with the same functions used in training."""
    rec = encode_text(normalize_text(text), tokenizer, budget)
    scores = backend.forward(np.asarray([rec.token_ids]), np.asarray([rec.attention_mask]))[0]
    return Prediction(sample_id=sample_id, emotion=argmax_emotion(scores), scores=tuple(float(s) for s in scores))


def predict_batch(
    dataset: Dataset,
    backend: ClassifierBackend,
    tokenizer: TokenizerBackend,
    budget: int = DEFAULT_BUDGET,
    batch_size: int = 8,
) -> list[Prediction]:
    """One prediction per sample, in dataset order. Any labels are ignored."""
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    if len(dataset) == 0:
        return []
    features = encode_unlabeled(preprocess_dataset(dataset).samples, tokenizer, budget)
    scores = predict_scores(backend, features, batch_size)
    emotions = argmax_rows(scores)
    return [
        Prediction(sample_id=sid, emotion=Emotion(int(e)), scores=tuple(float(x) for x in row))
        for sid, e, row in zip(features.ids, emotions, scores)
    ]


def write_submission(
    predictions: Sequence[Prediction],
    dataset: Dataset,
    path: str | Path,
    include_text: bool = True,
) -> int:
    """Write ``id[,text],anger,...,surprise`` with one active label per row.

    Text is the original (un-normalized) sample text. Returns rows written.

    Raises:
        ContractError: prediction count or ids do not line up with ``dataset``.
    """
    if len(predictions) != len(dataset):
        raise ContractError(f"{len(predictions)} predictions for {len(dataset)} samples")
    for i, (p, s) in enumerate(zip(predictions, dataset.samples)):
        if p.sample_id != s.id:
            raise ContractError(f"row {i}: prediction id {p.sample_id!r} != sample id {s.id!r}")

    header = [ID_COLUMN] + ([TEXT_COLUMN] if include_text else []) + list(EMOTION_NAMES)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = CsvRowWriter(fh)
        writer.writerow(header)
        for p, s in zip(predictions, dataset.samples):
            row = [s.id] + ([s.text] if include_text else [])
            writer.writerow(row + to_one_hot(p.emotion).to_cells())
    return len(predictions)


def prediction_counts(predictions: Sequence[Prediction]) -> dict[str, int]:
    counts = Counter(p.emotion for p in predictions)
    return {e.label: counts.get(e, 0) for e in Emotion}
