"""Small generated corpora for offline checks of the pipeline."""
from __future__ import annotations

import numpy as np

from emopipe.corpus import EMOTION_NAMES, Dataset, LabelVector, Sample

# Hausa-flavoured filler shared by every class, so only the keyword separates them.
_FILLER = ("da", "ya", "na", "ta", "kan", "wannan", "yau", "sun", "mun", "ba")
_KEYWORDS = {
    "anger": ("fushi", "haushi"),
    "disgust": ("kyama", "ƙyama"),
    "fear": ("tsoro", "firgici"),
    "joy": ("farin", "murna"),
    "sadness": ("baƙin", "bakin-ciki"),
    "surprise": ("mamaki", "ban-mamaki"),
}


def separable_corpus(per_class: int = 10, seed: int = 0, split_name: str = "train") -> Dataset:
    """``6 * per_class`` single-label samples, each carrying its class keyword.

    Samples are interleaved by class; text mixes case and spacing so the
    normalizer has work to do.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(per_class):
        for k, name in enumerate(EMOTION_NAMES):
            words = list(rng.choice(_FILLER, size=int(rng.integers(3, 8))))
            kw = _KEYWORDS[name][i % 2]
            words.insert(int(rng.integers(0, len(words) + 1)), kw.upper() if i % 3 == 0 else kw)
            text = "  ".join(words) if i % 2 else " ".join(words)
            samples.append(Sample(id=f"{split_name}-{name}-{i}", text=text, labels=LabelVector.of(k)))
    return Dataset(split_name=split_name, samples=tuple(samples), labeled=True)


def unlabeled_corpus(n: int, seed: int = 0, split_name: str = "test") -> Dataset:
    """``n`` unlabeled samples drawn from the same vocabulary."""
    rng = np.random.default_rng(seed)
    vocab = _FILLER + tuple(w for pair in _KEYWORDS.values() for w in pair)
    samples = [
        Sample(id=f"{split_name}-{i:05d}", text=" ".join(rng.choice(vocab, size=int(rng.integers(1, 12)))))
        for i in range(n)
    ]
    return Dataset(split_name=split_name, samples=tuple(samples), labeled=False)
