"""Text cleaning shared by training and inference: lowercase, collapse whitespace."""
from __future__ import annotations

import dataclasses
import functools

from emopipe.corpus import Dataset

# Characters whose full lowercase mapping is longer than one code point,
# mapped to their UnicodeData simple lowercase instead.
_SIMPLE_LOWER_OVERRIDES = {"İ": "i"}


@functools.lru_cache(maxsize=None)
def _lower_char(c: str) -> str:
    low = c.lower()
    if len(low) == 1:
        return low
    return _SIMPLE_LOWER_OVERRIDES.get(c, c)


def simple_lower(text: str) -> str:
    """Per-code-point simple lowercase; never changes the length of ``text``.

    Unlike ``str.lower`` it ignores context (final sigma) and never expands
    a character into several.
    """
    return "".join(map(_lower_char, text))


def normalize_text(raw: str) -> str:
    """Lowercase ``raw`` and collapse every whitespace run to one space.

    ``"  Kotu   Ta \\tYi  "`` becomes ``"kotu ta yi"``; ``"Ƙasa Ɗaya"``
    becomes ``"ƙasa ɗaya"``.
    """
    # str.split() with no separator splits on all Unicode whitespace (incl. NBSP)
    return " ".join(simple_lower(raw).split())


def preprocess_dataset(dataset: Dataset) -> Dataset:
    """Return a copy of ``dataset`` with every text normalized."""
    samples = tuple(dataclasses.replace(s, text=normalize_text(s.text)) for s in dataset.samples)
    return dataclasses.replace(dataset, samples=samples)
