from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emopipe.corpus import (
    EMOTION_NAMES,
    Dataset,
    Emotion,
    LabelVector,
    Sample,
    class_distribution,
    format_distribution,
    load_split,
    validate,
    write_split,
)
from emopipe.errors import ContractError, DuplicateIdError, LabelValueError, SchemaError


def test_emotion_canonical_order():
    assert [e.label for e in Emotion] == ["anger", "disgust", "fear", "joy", "sadness", "surprise"]
    assert [int(e) for e in Emotion] == list(range(6))
    assert Emotion.from_name("Surprise") is Emotion.SURPRISE


def test_label_vector_rejects_bad_flags():
    with pytest.raises(ContractError):
        LabelVector((0, 0, 2, 0, 0, 0))
    with pytest.raises(ContractError):
        LabelVector((0, 1))


def test_load_sample(sample_path):
    ds = load_split(sample_path)
    assert len(ds) == 3
    first = ds.samples[0]
    assert first.id == "1"
    assert first.labels.bits == (0, 0, 0, 0, 0, 1)
    assert first.text == "Kotu Ta Yi Hukunci Kan Shari'ar Zaben Dan Majalisar PDP, Ta Yi Hukuncin Bazata"
    assert ds.samples[1].text == "Toh fah inji 'yan magana suka ce \"ana wata ga wata\""
    assert ds.samples[2].labels.bits == (0, 0, 1, 0, 1, 0)
    assert ds.ids == ["1", "2", "3"]


def test_empty_file_with_header(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("id,text,anger,disgust,fear,joy,sadness,surprise\n", encoding="utf-8")
    ds = load_split(path)
    assert len(ds) == 0 and ds.labeled


def test_no_header_is_schema_error(tmp_path):
    path = tmp_path / "blank.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(SchemaError, match="header"):
        load_split(path)


def test_non_binary_label_names_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,text,anger,disgust,fear,joy,sadness,surprise\nr7,hello,0,0,2,0,0,0\n", encoding="utf-8")
    with pytest.raises(LabelValueError, match="r7"):
        load_split(path)


def test_missing_emotion_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,text,anger,disgust,joy,sadness,surprise\n1,x,0,0,0,0,1\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="'fear'"):
        load_split(path)


def test_reordered_emotion_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,text,disgust,anger,fear,joy,sadness,surprise\n1,x,0,0,0,0,0,1\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="anger|disgust"):
        load_split(path)


def test_duplicate_id(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text(
        "id,text,anger,disgust,fear,joy,sadness,surprise\n1,a,1,0,0,0,0,0\n1,b,1,0,0,0,0,0\n",
        encoding="utf-8",
    )
    with pytest.raises(DuplicateIdError):
        load_split(path)


def test_case_insensitive_header_extra_columns_crlf(tmp_path, caplog):
    path = tmp_path / "drift.csv"
    path.write_bytes(
        b"ID,Text,Lang,Anger,Disgust,Fear,Joy,Sadness,Surprise\r\n"
        b"a,Sannu,hau,0,0,0,1,0,0\r\nb,\"line1\r\nline2\",hau,1,0,0,0,0,0\r\n"
    )
    ds = load_split(path)
    assert [s.id for s in ds] == ["a", "b"]
    assert ds.samples[0].labels.bits == (0, 0, 0, 1, 0, 0)
    assert ds.samples[1].text == "line1\r\nline2"
    assert "lang" in caplog.text


def test_invalid_utf8(tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes(b"id,text\n1,caf\xe9\n")
    with pytest.raises(SchemaError, match="UTF-8"):
        load_split(path, labeled=False)


def test_unlabeled_split(tmp_path):
    path = tmp_path / "test.csv"
    path.write_text("id,text\n1,Ina kwana\n2,Lafiya lau\n", encoding="utf-8")
    ds = load_split(path, labeled=False)
    assert not ds.labeled and all(s.labels is None for s in ds)
    with pytest.raises(ContractError):
        class_distribution(ds)


def test_validate_sample_is_clean(sample_path):
    rep = validate(load_split(sample_path))
    assert (rep.empty_count, rep.neutral_count, rep.duplicate_count) == (0, 0, 0)
    assert rep.ok


def test_validate_flags_neutral_empty_and_duplicates():
    samples = (
        Sample("a", "same text", LabelVector.of(Emotion.JOY)),
        Sample("b", "same text", LabelVector.of(Emotion.FEAR)),
        Sample("c", "   ", LabelVector.of(Emotion.JOY)),
        Sample("d", "quiet", LabelVector((0,) * 6)),
    )
    ds = Dataset("train", samples, labeled=True)
    rep = validate(ds)
    assert rep.neutral_ids == ("d",)
    assert rep.empty_text_ids == ("c",)
    assert rep.duplicate_text_groups == (("a", "b"),)
    assert len(ds) == 4  # untouched


def test_class_distribution_sample(sample_path):
    stats = class_distribution(load_split(sample_path))
    assert stats.as_dict() == {
        "anger": 0, "disgust": 0, "fear": 1, "joy": 0, "sadness": 1, "surprise": 2,
        "multi_label": 1, "neutral": 0, "total": 3,
    }


def test_class_distribution_empty_and_repeated():
    assert class_distribution(Dataset("train", (), True)).per_emotion_count == (0,) * 6
    joy = [Sample(str(i), "murna", LabelVector.of(Emotion.JOY)) for i in range(10)]
    stats = class_distribution(Dataset("train", joy, True))
    assert stats.per_emotion_count[Emotion.JOY] == 10
    assert stats.multi_label_count == 0


def test_format_distribution_lists_every_emotion(sample_path):
    text = format_distribution(class_distribution(load_split(sample_path)))
    for name in EMOTION_NAMES:
        assert name in text
    assert "surprise" in text and " 2 " in text


label_vectors = st.tuples(*[st.integers(0, 1)] * 6).map(LabelVector)
texts = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"), min_size=1, max_size=30)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(texts, label_vectors), max_size=20))
def test_roundtrip_and_row_count(tmp_path_factory, rows):
    samples = tuple(Sample(f"id{i}", t, lv) for i, (t, lv) in enumerate(rows))
    ds = Dataset("train", samples, labeled=True)
    path = tmp_path_factory.mktemp("rt") / "train.csv"
    write_split(ds, path)
    again = load_split(path, split_name="train")
    assert again == ds
    assert len(again.samples) == len(rows)


@settings(max_examples=50, deadline=None)
@given(st.lists(label_vectors, max_size=30), st.randoms())
def test_distribution_permutation_invariant(vectors, rnd: random.Random):
    samples = [Sample(str(i), "x", v) for i, v in enumerate(vectors)]
    shuffled = samples[:]
    rnd.shuffle(shuffled)
    a = class_distribution(Dataset("t", samples, True))
    b = class_distribution(Dataset("t", shuffled, True))
    assert a == b
    assert sum(a.per_emotion_count) >= a.total - a.neutral_count
    assert a.neutral_count + sum(1 for v in vectors if v.popcount) == a.total
