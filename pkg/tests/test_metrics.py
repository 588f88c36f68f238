from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emopipe.errors import ContractError
from emopipe.metrics import Averaging, confusion_matrix, parse_record, render_report, report
from tests.oracles import brute_force_report, flatten


def test_confusion_examples():
    cm = confusion_matrix([3, 4, 3], [3, 3, 3])
    expected = np.zeros((6, 6), int)
    expected[3, 3], expected[4, 3] = 2, 1
    np.testing.assert_array_equal(cm, expected)
    np.testing.assert_array_equal(confusion_matrix([0, 5, 2, 2], [0, 5, 2, 2]), np.diag([1, 0, 2, 0, 0, 1]))
    assert confusion_matrix([], []).sum() == 0


@pytest.mark.parametrize("gold,pred", [([1, 2], [1]), ([6], [0]), ([-1], [0])])
def test_confusion_contract(gold, pred):
    with pytest.raises(ContractError):
        confusion_matrix(gold, pred)


def test_three_sample_case():
    # frozen from brute_force_report([3, 4, 3], [3, 3, 3], "macro_present")
    rep = report([3, 4, 3], [3, 3, 3], "macro_present")
    assert rep.accuracy == pytest.approx(2 / 3)
    joy, sad = rep.per_class[3], rep.per_class[4]
    assert (joy.precision, joy.recall, joy.f1) == pytest.approx((2 / 3, 1.0, 0.8))
    assert (sad.precision, sad.recall, sad.f1) == (0.0, 0.0, 0.0)
    assert rep.macro_f1 == pytest.approx(0.4)
    assert rep.included_classes == (3, 4)
    assert report([3, 4, 3], [3, 3, 3], "macro_all").macro_f1 == pytest.approx(0.8 / 6)


def test_empty_report_rejected():
    with pytest.raises(ContractError):
        report([], [])


def test_perfect_predictions():
    rep = report([0, 1, 2, 3, 4, 5, 3], [0, 1, 2, 3, 4, 5, 3])
    assert rep.accuracy == 1.0
    assert rep.macro_f1 == rep.macro_precision == rep.macro_recall == 1.0
    assert all(s.f1 == 1.0 for s in rep.per_class)


def test_render_three_sample_case():
    table, record = render_report(report([3, 4, 3], [3, 3, 3], "macro_present"))
    macro_line = next(line for line in table.splitlines() if "macro avg" in line)
    assert macro_line.split()[4] == "0.4000"
    kv = parse_record(record)
    assert float(kv["macro_f1"]) == pytest.approx(0.4)
    assert kv["averaging_mode"] == "macro_present"
    assert render_report(report([3, 4, 3], [3, 3, 3], "macro_present")) == (table, record)


def test_render_identity_case_all_ones():
    table, _ = render_report(report(list(range(6)), list(range(6))))
    for line in table.splitlines():
        cells = [c for c in line.split() if "." in c]
        assert all(c == "1.0000" for c in cells)


pairs = st.integers(1, 50).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n), st.lists(st.integers(0, 5), min_size=n, max_size=n))
)


@settings(max_examples=200)
@given(pairs, st.sampled_from(["macro_all", "macro_present"]))
def test_matches_brute_force_oracle(gp, mode):
    gold, pred = gp
    got = flatten(report(gold, pred, mode))
    want = brute_force_report(gold, pred, mode)
    for key, value in want.items():
        assert got[key] == pytest.approx(value, abs=1e-9), key


@settings(max_examples=100)
@given(pairs, st.randoms())
def test_joint_permutation_invariance(gp, rnd: random.Random):
    gold, pred = gp
    idx = list(range(len(gold)))
    rnd.shuffle(idx)
    a = report(gold, pred, "macro_present")
    b = report([gold[i] for i in idx], [pred[i] for i in idx], "macro_present")
    assert a == b


@settings(max_examples=100)
@given(pairs, st.permutations(range(6)))
def test_label_permutation_equivariance(gp, perm):
    gold, pred = gp
    a = report(gold, pred, "macro_all")
    b = report([perm[g] for g in gold], [perm[p] for p in pred], "macro_all")
    for k in range(6):
        assert b.per_class[perm[k]] == a.per_class[k]
    assert b.accuracy == a.accuracy
    for f in ("macro_precision", "macro_recall", "macro_f1"):
        assert getattr(b, f) == pytest.approx(getattr(a, f), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(pairs)
def test_agrees_with_sklearn(gp):
    skm = pytest.importorskip("sklearn.metrics")
    gold, pred = gp
    rep = report(gold, pred, Averaging.MACRO_ALL)
    p, r, f, _ = skm.precision_recall_fscore_support(gold, pred, labels=list(range(6)), average="macro", zero_division=0)
    assert (rep.macro_precision, rep.macro_recall, rep.macro_f1) == pytest.approx((p, r, f), abs=1e-12)
    wp, wr, wf, _ = skm.precision_recall_fscore_support(gold, pred, labels=list(range(6)), average="weighted", zero_division=0)
    assert (rep.weighted_precision, rep.weighted_recall, rep.weighted_f1) == pytest.approx((wp, wr, wf), abs=1e-12)
    assert rep.accuracy == pytest.approx(skm.accuracy_score(gold, pred))
