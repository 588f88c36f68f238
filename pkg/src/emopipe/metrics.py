"""Accuracy, per-class and averaged precision/recall/F1, confusion matrices.

Zero-division is always resolved to ``0.0`` so averages are total functions.
Two macro averages are reported:

* ``macro_all``: mean over all six classes;
* ``macro_present``: mean over classes that occur in gold or predictions.

Support-weighted averages are computed alongside for comparison.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from emopipe.corpus import EMOTION_NAMES, NUM_EMOTIONS
from emopipe.errors import ContractError

ZERO_DIVISION = 0.0


class Averaging(str, enum.Enum):
    MACRO_ALL = "macro_all"
    MACRO_PRESENT = "macro_present"


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: tuple[ClassScores, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    support: tuple[int, ...]
    predicted: tuple[int, ...]
    averaging_mode: Averaging
    confusion: tuple[tuple[int, ...], ...]
    total: int

    @property
    def included_classes(self) -> tuple[int, ...]:
        if self.averaging_mode is Averaging.MACRO_ALL:
            return tuple(range(NUM_EMOTIONS))
        return tuple(k for k in range(NUM_EMOTIONS) if self.support[k] or self.predicted[k])


def _check_ordinals(values: Sequence[int], name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional")
    if arr.size == 0:
        return arr.astype(np.int64)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ContractError(f"{name} must hold integer class ordinals, got dtype {arr.dtype}")
    bad = (arr < 0) | (arr >= NUM_EMOTIONS)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ContractError(f"{name}[{i}] = {arr[i]} is not a class ordinal in [0, {NUM_EMOTIONS - 1}]")
    return arr.astype(np.int64)


def confusion_matrix(gold: Sequence[int], pred: Sequence[int]) -> np.ndarray:
    """6x6 counts with rows = gold class and columns = predicted class."""
    g = _check_ordinals(gold, "gold")
    p = _check_ordinals(pred, "pred")
    if g.shape != p.shape:
        raise ContractError(f"gold and pred lengths differ: {g.size} vs {p.size}")
    cm = np.zeros((NUM_EMOTIONS, NUM_EMOTIONS), dtype=np.int64)
    np.add.at(cm, (g, p), 1)
    return cm


def _ratio(num: int, den: int) -> float:
    return num / den if den else ZERO_DIVISION


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else ZERO_DIVISION


def report(
    gold: Sequence[int],
    pred: Sequence[int],
    averaging_mode: Averaging | str = Averaging.MACRO_ALL,
) -> MetricsReport:
    mode = Averaging(averaging_mode)
    cm = confusion_matrix(gold, pred)
    total = int(cm.sum())
    if total == 0:
        raise ContractError("cannot report metrics on an empty evaluation set")

    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    per_class = []
    for k in range(NUM_EMOTIONS):
        p = _ratio(int(tp[k]), int(predicted[k]))
        r = _ratio(int(tp[k]), int(support[k]))
        per_class.append(ClassScores(p, r, _f1(p, r)))

    if mode is Averaging.MACRO_ALL:
        included = list(range(NUM_EMOTIONS))
    else:
        included = [k for k in range(NUM_EMOTIONS) if support[k] or predicted[k]]

    def macro(attr: str) -> float:
        return sum(getattr(per_class[k], attr) for k in included) / len(included)

    def weighted(attr: str) -> float:
        return sum(getattr(per_class[k], attr) * int(support[k]) for k in range(NUM_EMOTIONS)) / total

    return MetricsReport(
        accuracy=int(tp.sum()) / total,
        per_class=tuple(per_class),
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        support=tuple(int(x) for x in support),
        predicted=tuple(int(x) for x in predicted),
        averaging_mode=mode,
        confusion=tuple(tuple(int(x) for x in row) for row in cm),
        total=total,
    )


def report_record(rep: MetricsReport) -> dict[str, str]:
    """Flat key/value view; floats use ``repr`` so values round-trip exactly."""
    rec: dict[str, str] = {
        "averaging_mode": rep.averaging_mode.value,
        "zero_division": repr(ZERO_DIVISION),
        "total": str(rep.total),
        "accuracy": repr(rep.accuracy),
        "macro_precision": repr(rep.macro_precision),
        "macro_recall": repr(rep.macro_recall),
        "macro_f1": repr(rep.macro_f1),
        "weighted_precision": repr(rep.weighted_precision),
        "weighted_recall": repr(rep.weighted_recall),
        "weighted_f1": repr(rep.weighted_f1),
    }
    for name, scores, sup in zip(EMOTION_NAMES, rep.per_class, rep.support):
        rec[f"{name}.precision"] = repr(scores.precision)
        rec[f"{name}.recall"] = repr(scores.recall)
        rec[f"{name}.f1"] = repr(scores.f1)
        rec[f"{name}.support"] = str(sup)
    for g, row in zip(EMOTION_NAMES, rep.confusion):
        rec[f"confusion.{g}"] = " ".join(str(x) for x in row)
    return rec


def render_table(rep: MetricsReport, digits: int = 4) -> str:
    """Fixed-width per-class table in the layout of sklearn's classification_report."""
    width = max(len(n) for n in (*EMOTION_NAMES, "weighted avg"))
    head = f"{'':>{width}} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
    lines = [head, ""]
    for name, s, sup in zip(EMOTION_NAMES, rep.per_class, rep.support):
        lines.append(
            f"{name:>{width}} {s.precision:>9.{digits}f} {s.recall:>9.{digits}f} {s.f1:>9.{digits}f} {sup:>9d}"
        )
    lines.append("")
    lines.append(f"{'accuracy':>{width}} {'':>9} {'':>9} {rep.accuracy:>9.{digits}f} {rep.total:>9d}")
    macro_name = "macro avg"
    lines.append(
        f"{macro_name:>{width}} {rep.macro_precision:>9.{digits}f} {rep.macro_recall:>9.{digits}f} "
        f"{rep.macro_f1:>9.{digits}f} {rep.total:>9d}"
    )
    lines.append(
        f"{'weighted avg':>{width}} {rep.weighted_precision:>9.{digits}f} {rep.weighted_recall:>9.{digits}f} "
        f"{rep.weighted_f1:>9.{digits}f} {rep.total:>9d}"
    )
    lines.append("")
    lines.append(f"macro averaging: {rep.averaging_mode.value} (classes {','.join(map(str, rep.included_classes))}); zero division -> 0")
    return "\n".join(lines) + "\n"


def render_report(rep: MetricsReport) -> tuple[str, str]:
    """Return the text table and the ``key=value`` record, both as strings."""
    record = "".join(f"{k}={v}\n" for k, v in report_record(rep).items())
    return render_table(rep), record


def parse_record(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
