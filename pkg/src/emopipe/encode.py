"""Fixed-length token-id encoding with attention masks.

Tokenizers plug in through :class:`TokenizerBackend`. The repo ships
:class:`HashTokenizer`, a deterministic whitespace/word-hash backend, so the
whole pipeline runs without the pretrained tokenizer; the pretrained one is
wrapped by :class:`emopipe.adapters.TransformersTokenizer`.
"""
from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

from emopipe.corpus import Emotion, Sample
from emopipe.errors import ConfigError, ContractError

DEFAULT_BUDGET = 128
NO_LABEL = -1
CACHE_FORMAT = "emopipe-features/1"


@runtime_checkable
class TokenizerBackend(Protocol):
    pad_id: int
    vocab_size: int

    def tokenize(self, text: str) -> list[int]:
        """Token ids for ``text``, including whatever special tokens the backend adds."""
        ...

    def fingerprint(self) -> str:
        ...


class HashTokenizer:
    """Whitespace tokenizer that hashes each word into a fixed id range.

    Ids ``0..n_special-1`` are reserved (``0`` is padding); words map to
    ``n_special + crc32(word) % (vocab_size - n_special)``. With
    ``add_special_tokens`` the sequence is wrapped as ``[CLS] ... [SEP]``.
    """

    PAD, CLS, SEP = 0, 1, 2
    N_SPECIAL = 3

    def __init__(self, vocab_size: int = 4096, add_special_tokens: bool = False):
        if vocab_size <= self.N_SPECIAL:
            raise ConfigError(f"vocab_size must exceed {self.N_SPECIAL}, got {vocab_size}")
        self.vocab_size = vocab_size
        self.add_special_tokens = add_special_tokens
        self.pad_id = self.PAD

    def word_id(self, word: str) -> int:
        buckets = self.vocab_size - self.N_SPECIAL
        return self.N_SPECIAL + zlib.crc32(word.encode("utf-8")) % buckets

    def tokenize(self, text: str) -> list[int]:
        ids = [self.word_id(w) for w in text.split()]
        if self.add_special_tokens:
            ids = [self.CLS, *ids, self.SEP]
        return ids

    def fingerprint(self) -> str:
        return f"hash-ws/1:vocab={self.vocab_size}:specials={int(self.add_special_tokens)}"

    def __repr__(self) -> str:
        return f"HashTokenizer(vocab_size={self.vocab_size}, add_special_tokens={self.add_special_tokens})"


@dataclass(frozen=True)
class FeatureRecord:
    token_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    label: int | None = None

    @property
    def length(self) -> int:
        return len(self.token_ids)


@dataclass(frozen=True)
class FeatureSet:
    """Uniform-length records stored as ``(n, budget)`` integer arrays."""

    token_ids: np.ndarray
    attention_mask: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]
    sequence_budget: int = DEFAULT_BUDGET
    tokenizer_fingerprint: str = ""
    meta: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        n = len(self.ids)
        shape = (n, self.sequence_budget)
        if self.token_ids.shape != shape or self.attention_mask.shape != shape:
            raise ContractError(
                f"feature arrays must have shape {shape}, got "
                f"{self.token_ids.shape} and {self.attention_mask.shape}"
            )
        if self.labels.shape != (n,):
            raise ContractError(f"labels must have shape ({n},), got {self.labels.shape}")

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i: int) -> FeatureRecord:
        label = int(self.labels[i])
        return FeatureRecord(
            token_ids=tuple(int(x) for x in self.token_ids[i]),
            attention_mask=tuple(int(x) for x in self.attention_mask[i]),
            label=None if label == NO_LABEL else label,
        )

    @property
    def records(self) -> list[FeatureRecord]:
        return [self[i] for i in range(len(self))]

    @property
    def labeled(self) -> bool:
        return len(self) > 0 and bool(np.all(self.labels != NO_LABEL))

    def subset(self, index: Sequence[int] | np.ndarray) -> "FeatureSet":
        index = np.asarray(index, dtype=np.int64)
        return FeatureSet(
            token_ids=self.token_ids[index],
            attention_mask=self.attention_mask[index],
            labels=self.labels[index],
            ids=tuple(self.ids[i] for i in index),
            sequence_budget=self.sequence_budget,
            tokenizer_fingerprint=self.tokenizer_fingerprint,
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.sequence_budget}|{self.tokenizer_fingerprint}|{len(self)}".encode())
        for arr in (self.token_ids, self.attention_mask, self.labels):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update("\x1f".join(self.ids).encode("utf-8"))
        return h.hexdigest()


def _check_budget(budget: int) -> None:
    if budget < 2:
        raise ConfigError(f"sequence budget must be >= 2, got {budget}")


def encode_text(
    text: str,
    backend: TokenizerBackend,
    budget: int = DEFAULT_BUDGET,
    label: int | None = None,
) -> FeatureRecord:
    """Tokenize ``text``, keep the first ``budget`` ids and right-pad with ``pad_id``.

    Special tokens count against the budget.
    """
    _check_budget(budget)
    ids = backend.tokenize(text)[:budget]
    n = len(ids)
    pad = budget - n
    return FeatureRecord(
        token_ids=tuple(ids) + (backend.pad_id,) * pad,
        attention_mask=(1,) * n + (0,) * pad,
        label=label,
    )


def encode_samples(
    pairs: Iterable[tuple[Sample, Emotion | int | None]],
    backend: TokenizerBackend,
    budget: int = DEFAULT_BUDGET,
) -> FeatureSet:
    pairs = list(pairs)
    _check_budget(budget)
    n = len(pairs)
    token_ids = np.full((n, budget), backend.pad_id, dtype=np.int64)
    mask = np.zeros((n, budget), dtype=np.int8)
    labels = np.full(n, NO_LABEL, dtype=np.int64)
    for i, (sample, label) in enumerate(pairs):
        rec = encode_text(sample.text, backend, budget)
        token_ids[i] = rec.token_ids
        mask[i] = rec.attention_mask
        if label is not None:
            labels[i] = int(label)
    return FeatureSet(
        token_ids=token_ids,
        attention_mask=mask,
        labels=labels,
        ids=tuple(s.id for s, _ in pairs),
        sequence_budget=budget,
        tokenizer_fingerprint=backend.fingerprint(),
    )


def encode_dataset(
    reduced: Iterable[tuple[Sample, Emotion | int]],
    backend: TokenizerBackend,
    budget: int = DEFAULT_BUDGET,
) -> FeatureSet:
    """Encode ``(sample, dominant label)`` pairs, keeping their order."""
    return encode_samples(reduced, backend, budget)


def encode_unlabeled(samples: Iterable[Sample], backend: TokenizerBackend, budget: int = DEFAULT_BUDGET) -> FeatureSet:
    return encode_samples(((s, None) for s in samples), backend, budget)


def save_feature_set(features: FeatureSet, directory: str | Path, extra: dict[str, str] | None = None) -> str:
    """Write ``features`` as one ``.npy`` file per column plus ``header.json``.

    Returns the content hash, which is also stored in the header.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.save(directory / "token_ids.npy", features.token_ids, allow_pickle=False)
    np.save(directory / "attention_mask.npy", features.attention_mask, allow_pickle=False)
    np.save(directory / "labels.npy", features.labels, allow_pickle=False)
    (directory / "ids.json").write_text(json.dumps(list(features.ids), ensure_ascii=False) + "\n", encoding="utf-8")
    digest = features.content_hash()
    header = {
        "format": CACHE_FORMAT,
        "sequence_budget": features.sequence_budget,
        "tokenizer": features.tokenizer_fingerprint,
        "records": len(features),
        "sha256": digest,
        **(extra or {}),
    }
    (directory / "header.json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return digest


def load_feature_set(directory: str | Path) -> FeatureSet:
    directory = Path(directory)
    try:
        header = json.loads((directory / "header.json").read_text(encoding="utf-8"))
        ids = json.loads((directory / "ids.json").read_text(encoding="utf-8"))
        token_ids = np.load(directory / "token_ids.npy", allow_pickle=False)
        mask = np.load(directory / "attention_mask.npy", allow_pickle=False)
        labels = np.load(directory / "labels.npy", allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ContractError(f"feature cache {directory} is unreadable: {exc}") from exc
    if header.get("format") != CACHE_FORMAT:
        raise ContractError(f"feature cache {directory}: unknown format {header.get('format')!r}")
    features = FeatureSet(
        token_ids=token_ids,
        attention_mask=mask,
        labels=labels,
        ids=tuple(ids),
        sequence_budget=int(header["sequence_budget"]),
        tokenizer_fingerprint=header["tokenizer"],
        meta={k: str(v) for k, v in header.items()},
    )
    if len(features) != header["records"] or features.content_hash() != header["sha256"]:
        raise ContractError(f"feature cache {directory} does not match its header")
    return features
