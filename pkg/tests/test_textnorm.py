from __future__ import annotations

import dataclasses

from hypothesis import given
from hypothesis import strategies as st

from emopipe.corpus import Dataset, load_split
from emopipe.textnorm import normalize_text, preprocess_dataset, simple_lower


def test_examples():
    assert normalize_text("  Kotu   Ta \tYi  ") == "kotu ta yi"
    assert normalize_text("Ƙasa Ɗaya") == "ƙasa ɗaya"
    assert normalize_text("") == ""
    assert normalize_text("Ɓarna  DA\nƳaƳa") == "ɓarna da ƴaƴa"


def test_simple_lowercase_never_expands():
    assert normalize_text("İSTANBUL") == "istanbul"
    assert len(simple_lower("İ")) == 1
    # context-free: a trailing capital sigma maps to the plain small sigma
    assert simple_lower("ΟΔΟΣ") == "οδοσ"


@given(st.text())
def test_idempotent_and_shrinking(x):
    once = normalize_text(x)
    assert normalize_text(once) == once
    assert len(once) <= len(x)
    assert once == once.strip()
    assert "  " not in once
    assert all(c == " " or not c.isspace() for c in once)


def test_preprocess_sample(sample_path):
    ds = load_split(sample_path)
    clean = preprocess_dataset(ds)
    assert clean.ids == ds.ids
    assert [s.labels for s in clean] == [s.labels for s in ds]
    assert clean.samples[0].text == "kotu ta yi hukunci kan shari'ar zaben dan majalisar pdp, ta yi hukuncin bazata"
    assert preprocess_dataset(clean) == clean
    assert ds.samples[0].text.startswith("Kotu")  # input untouched


def test_preprocess_empty():
    ds = Dataset("test", (), labeled=False)
    assert preprocess_dataset(ds) == ds


def test_preprocess_is_a_copy():
    ds = Dataset("t", (), True)
    assert dataclasses.replace(ds) == preprocess_dataset(ds)
