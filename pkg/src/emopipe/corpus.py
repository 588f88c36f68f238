"""Loading, validating and summarizing one-hot emotion CSV splits.

Labeled files carry ``id,text,anger,disgust,fear,joy,sadness,surprise``;
unlabeled (test) files carry ``id,text``. Header names are matched
case-insensitively, but the six emotion columns must keep canonical order.
"""
from __future__ import annotations

import csv
import enum
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from emopipe.errors import ContractError, DuplicateIdError, LabelValueError, SchemaError

logger = logging.getLogger(__name__)


class Emotion(enum.IntEnum):
    ANGER = 0
    DISGUST = 1
    FEAR = 2
    JOY = 3
    SADNESS = 4
    SURPRISE = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "Emotion":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown emotion {name!r}") from None


NUM_EMOTIONS = len(Emotion)
EMOTION_NAMES: tuple[str, ...] = tuple(e.label for e in Emotion)
ID_COLUMN = "id"
TEXT_COLUMN = "text"
LABELED_HEADER: tuple[str, ...] = (ID_COLUMN, TEXT_COLUMN, *EMOTION_NAMES)
UNLABELED_HEADER: tuple[str, ...] = (ID_COLUMN, TEXT_COLUMN)
SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class LabelVector:
    """Six presence flags indexed by :class:`Emotion` ordinal."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(self.bits)
        if len(bits) != NUM_EMOTIONS:
            raise ContractError(f"label vector needs {NUM_EMOTIONS} flags, got {len(bits)}")
        if any(b not in (0, 1) or isinstance(b, bool) for b in bits):
            raise ContractError(f"label flags must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def of(cls, *emotions: Emotion | int) -> "LabelVector":
        bits = [0] * NUM_EMOTIONS
        for e in emotions:
            bits[int(e)] = 1
        return cls(tuple(bits))

    @property
    def active(self) -> tuple[Emotion, ...]:
        return tuple(Emotion(i) for i, b in enumerate(self.bits) if b)

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    def is_neutral(self) -> bool:
        return self.popcount == 0

    def to_cells(self) -> list[str]:
        return [str(b) for b in self.bits]


@dataclass(frozen=True)
class Sample:
    id: str
    text: str
    labels: LabelVector | None = None


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable split. Either every sample is labeled or none is."""

    split_name: str
    samples: tuple[Sample, ...]
    labeled: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        flags = {s.labels is not None for s in self.samples}
        if flags and flags != {self.labeled}:
            raise ContractError(
                f"split {self.split_name!r}: labeled={self.labeled} but samples disagree"
            )

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]


@dataclass(frozen=True)
class DistributionStats:
    per_emotion_count: tuple[int, ...]
    multi_label_count: int
    neutral_count: int
    total: int

    def as_dict(self) -> dict[str, int]:
        out = {name: n for name, n in zip(EMOTION_NAMES, self.per_emotion_count)}
        out.update(multi_label=self.multi_label_count, neutral=self.neutral_count, total=self.total)
        return out


@dataclass(frozen=True)
class ValidationReport:
    empty_text_ids: tuple[str, ...] = ()
    neutral_ids: tuple[str, ...] = ()
    # each group holds the ids of samples sharing one text
    duplicate_text_groups: tuple[tuple[str, ...], ...] = ()

    @property
    def empty_count(self) -> int:
        return len(self.empty_text_ids)

    @property
    def neutral_count(self) -> int:
        return len(self.neutral_ids)

    @property
    def duplicate_count(self) -> int:
        return len(self.duplicate_text_groups)

    @property
    def ok(self) -> bool:
        return not (self.empty_text_ids or self.neutral_ids or self.duplicate_text_groups)

    def warnings(self) -> list[str]:
        lines = [f"empty text: id={i}" for i in self.empty_text_ids]
        lines += [f"neutral (all-zero) labels: id={i}" for i in self.neutral_ids]
        lines += [f"duplicate text: ids={','.join(g)}" for g in self.duplicate_text_groups]
        return lines


def _resolve_columns(header: Sequence[str], labeled: bool, source: str) -> tuple[int, int, list[int]]:
    """Map the required columns to positions in ``header``.

    Returns the id index, the text index and the six emotion indices.
    """
    lowered = [h.strip().lower() for h in header]
    positions: dict[str, int] = {}
    for i, name in enumerate(lowered):
        positions.setdefault(name, i)

    for required in (ID_COLUMN, TEXT_COLUMN):
        if required not in positions:
            raise SchemaError(f"{source}: missing required column {required!r}")

    emotion_idx: list[int] = []
    if labeled:
        for name in EMOTION_NAMES:
            if name not in positions:
                raise SchemaError(f"{source}: missing emotion column {name!r}")
            emotion_idx.append(positions[name])
        for prev, cur, name in zip(emotion_idx, emotion_idx[1:], EMOTION_NAMES[1:]):
            if cur < prev:
                raise SchemaError(
                    f"{source}: emotion column {name!r} is out of canonical order "
                    f"(expected {','.join(EMOTION_NAMES)})"
                )

    known = {ID_COLUMN, TEXT_COLUMN, *(EMOTION_NAMES if labeled else ())}
    extras = [h for h in lowered if h not in known]
    if extras:
        logger.warning("%s: ignoring extra columns %s", source, extras)
    return positions[ID_COLUMN], positions[TEXT_COLUMN], emotion_idx


def _parse_flag(cell: str, row_id: str, column: str, source: str) -> int:
    value = cell.strip()
    if value == "0":
        return 0
    if value == "1":
        return 1
    raise LabelValueError(
        f"{source}: row id={row_id!r}: column {column!r} has non-binary value {cell!r}"
    )


def load_split(path: str | Path, labeled: bool = True, split_name: str | None = None) -> Dataset:
    """Read one split from a task CSV file.

    Text is returned verbatim; cleaning happens in :mod:`emopipe.textnorm`.

    Raises:
        SchemaError: header missing or emotion columns out of order.
        LabelValueError: a label cell is not ``0``/``1``.
        DuplicateIdError: an id occurs twice.
    """
    path = Path(path)
    source = str(path)
    if split_name is None:
        split_name = path.stem
    try:
        with path.open("r", encoding="utf-8-sig", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise SchemaError(f"{source}: header row is missing")
            id_i, text_i, emo_i = _resolve_columns(header, labeled, source)
            width = max([id_i, text_i, *emo_i]) + 1

            samples: list[Sample] = []
            seen: dict[str, int] = {}
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) < width:
                    raise SchemaError(
                        f"{source}: line {line_no} has {len(row)} cells, expected at least {width}"
                    )
                row_id = row[id_i]
                if row_id in seen:
                    raise DuplicateIdError(
                        f"{source}: duplicate id {row_id!r} on lines {seen[row_id]} and {line_no}"
                    )
                seen[row_id] = line_no
                labels = None
                if labeled:
                    labels = LabelVector(
                        tuple(
                            _parse_flag(row[i], row_id, name, source)
                            for i, name in zip(emo_i, EMOTION_NAMES)
                        )
                    )
                samples.append(Sample(id=row_id, text=row[text_i], labels=labels))
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{source}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc

    logger.debug("loaded %d samples from %s", len(samples), source)
    return Dataset(split_name=split_name, samples=tuple(samples), labeled=labeled)


def write_split(dataset: Dataset, path: str | Path, include_text: bool = True) -> None:
    """Write ``dataset`` in the task schema (UTF-8, LF line endings)."""
    header = [ID_COLUMN]
    if include_text:
        header.append(TEXT_COLUMN)
    if dataset.labeled:
        header.extend(EMOTION_NAMES)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = CsvRowWriter(fh)
        writer.writerow(header)
        for s in dataset.samples:
            row = [s.id]
            if include_text:
                row.append(s.text)
            if s.labels is not None:
                row.extend(s.labels.to_cells())
            writer.writerow(row)


class CsvRowWriter:
    """Comma/double-quote CSV with LF line endings.

    ``csv.writer`` only quotes characters of its own line terminator, so a
    bare ``\r`` inside a field would be written unquoted; such rows are
    written fully quoted instead.
    """

    def __init__(self, fh):
        self._minimal = csv.writer(fh, lineterminator="\n")
        self._quoted = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_ALL)

    def writerow(self, row: Sequence[str]) -> None:
        if any("\r" in cell for cell in row):
            self._quoted.writerow(row)
        else:
            self._minimal.writerow(row)


def validate(dataset: Dataset) -> ValidationReport:
    """Report empty texts, neutral rows and duplicated texts. Never raises."""
    empty = tuple(s.id for s in dataset.samples if not s.text.strip())
    neutral = tuple(
        s.id for s in dataset.samples if s.labels is not None and s.labels.is_neutral()
    )
    by_text: dict[str, list[str]] = defaultdict(list)
    for s in dataset.samples:
        if s.text.strip():
            by_text[s.text].append(s.id)
    dupes = tuple(tuple(ids) for ids in by_text.values() if len(ids) > 1)
    return ValidationReport(empty_text_ids=empty, neutral_ids=neutral, duplicate_text_groups=dupes)


def class_distribution(dataset: Dataset | Iterable[Sample]) -> DistributionStats:
    if isinstance(dataset, Dataset):
        if not dataset.labeled:
            raise ContractError(f"split {dataset.split_name!r} is unlabeled; no distribution")
        samples = dataset.samples
    else:
        samples = tuple(dataset)
    counts = [0] * NUM_EMOTIONS
    multi = neutral = 0
    for s in samples:
        if s.labels is None:
            raise ContractError(f"sample {s.id!r} is unlabeled; no distribution")
        for i, b in enumerate(s.labels.bits):
            counts[i] += b
        n = s.labels.popcount
        if n == 0:
            neutral += 1
        elif n >= 2:
            multi += 1
    return DistributionStats(
        per_emotion_count=tuple(counts),
        multi_label_count=multi,
        neutral_count=neutral,
        total=len(samples),
    )


def format_distribution(stats: DistributionStats, title: str = "") -> str:
    """Render a per-emotion frequency table with share of rows and a text bar."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'emotion':<10} {'count':>7} {'share':>7}")
    total = stats.total
    peak = max(stats.per_emotion_count, default=0)
    for name, n in zip(EMOTION_NAMES, stats.per_emotion_count):
        share = n / total if total else 0.0
        bar = "#" * (round(30 * n / peak) if peak else 0)
        lines.append(f"{name:<10} {n:>7d} {share:>7.2%} {bar}".rstrip())
    lines.append(f"{'multi':<10} {stats.multi_label_count:>7d}")
    lines.append(f"{'neutral':<10} {stats.neutral_count:>7d}")
    lines.append(f"{'total':<10} {total:>7d}")
    return "\n".join(lines) + "\n"

