from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tcensus.errors import EmptyReference, EmptyScores, EmptySet, InsufficientData
from tcensus.evaluation import (LabeledFeatureSet, detection_rate_at_fpr, diff_csv,
                                intersection_gram,
                                diff_negative_fraction, diff_score, diff_scores, hik,
                                hik_to_all, roc, roc_csv, roc_summary)

hists = arrays(np.float64, 6, elements=st.integers(0, 50).map(float))


def test_hik_examples():
    assert hik([1, 2, 3], [3, 2, 1]) == 2 / 3
    assert hik([1, 2, 3], [1, 2, 3]) == 1.0
    assert hik([1, 2, 3], [4, 2, 9]) == 1.0
    with pytest.raises(EmptyReference):
        hik([0, 0], [1, 1])


@settings(max_examples=100, deadline=None)
@given(hists, hists, st.integers(1, 9))
def test_hik_range_and_scale(m, n, k):
    if m.sum() == 0:
        return
    v = hik(m, n)
    assert 0.0 <= v <= 1.0
    assert hik(m * k, n * k) == pytest.approx(v)
    assert hik(m, m) == 1.0
    assert hik_to_all(m, np.vstack([n, m]))[1] == 1.0


def _brute_diff(s, same, other):
    def h(a, b):
        return Fraction(int(np.minimum(a, b).sum()), int(np.sum(a)))
    return max(h(s, x) for x in same) - max(h(s, x) for x in other)


def test_diff_score_toy_sets():
    s = np.array([2, 1, 1])
    same = np.array([[2, 0, 0], [1, 1, 1]])
    other = np.array([[0, 0, 4], [0, 3, 0]])
    assert diff_score(s, same, other) == pytest.approx(float(_brute_diff(s, same, other)))
    assert diff_score(s, same, other) == pytest.approx(0.75 - 0.25)


def test_diff_score_identities():
    s = np.array([1.0, 4.0, 2.0])
    other = np.array([[0.0, 4.0, 0.0]])
    assert diff_score(s, [s], other) == 1 - hik(s, other[0]) >= 0
    assert diff_score(s, other, other) == 0
    with pytest.raises(EmptySet):
        diff_score(s, np.zeros((0, 3)), other)


def test_separated_clusters_have_no_negative_diffs(rng):
    a = rng.integers(0, 3, size=(30, 8)) + np.array([20, 20, 20, 20, 0, 0, 0, 0])
    b = rng.integers(0, 3, size=(30, 8)) + np.array([0, 0, 0, 0, 20, 20, 20, 20])
    data = LabeledFeatureSet(np.vstack([a, b]), [1] * 30 + [-1] * 30)
    assert diff_negative_fraction(data, 1) == 0.0
    assert diff_negative_fraction(data, -1) == 0.0


def test_random_labels_give_about_half():
    rng = np.random.default_rng(5)
    # Equal-mass histograms, like real block histograms. With unequal masses the
    # asymmetric kernel lets one heavy vector be everyone's best match, so the
    # fraction swings between near 0 and near 100 instead of averaging out.
    X = np.array([rng.multinomial(1000, rng.dirichlet(np.ones(16))) for _ in range(1000)])
    data = LabeledFeatureSet(X, rng.choice([1, -1], size=1000))
    assert 40.0 <= diff_negative_fraction(data, 1) <= 60.0


def test_diff_scores_needs_data():
    with pytest.raises(InsufficientData):
        diff_scores(LabeledFeatureSet(np.ones((3, 2)), [1, -1, -1]), 1)
    with pytest.raises(EmptySet):
        diff_scores(LabeledFeatureSet(np.ones((3, 2)), [1, 1, 1]), 1)


def test_roc_hand_example():
    curve = roc([0.9, 0.8, 0.7, 0.4, 0.2], [0.6, 0.5, 0.3, 0.1, 0.05])
    assert detection_rate_at_fpr(curve, 0.2) == 0.6
    assert detection_rate_at_fpr(curve, 0.0) == 0.6
    assert detection_rate_at_fpr(curve, 1.0) == 1.0


def test_roc_separated_and_identical():
    curve = roc([5, 6, 7], [1, 2, 3])
    for f in (0.01, 0.3, 1.0):
        assert detection_rate_at_fpr(curve, f) == 1.0
    rng = np.random.default_rng(2)
    s = rng.normal(size=4000)
    curve = roc(s[:2000], s[2000:])
    assert np.max(np.abs(curve.tpr - curve.fpr)) < 0.06


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=30),
       st.lists(st.floats(-3, 3), min_size=1, max_size=30))
def test_roc_monotone(p, n):
    c = roc(p, n)
    assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)
    assert c.fpr[-1] == 1.0 and c.tpr[-1] == 1.0
    rates = [detection_rate_at_fpr(c, f) for f in np.linspace(0, 1, 11)]
    assert rates == sorted(rates)


def test_roc_empty():
    with pytest.raises(EmptyScores):
        roc([], [1.0])


def test_report_formats():
    curve = roc([1.0, 0.5], [0.2])
    lines = roc_csv(curve).splitlines()
    assert lines[0] == "threshold,fpr,detection_rate" and len(lines) == 5
    assert lines[1] == "inf,0.0,0.0"
    assert '"0.01": 1.0' in roc_summary({"tcentrist": curve})
    assert diff_csv([("tcentrist", "positive", 0, 0.25)]).splitlines()[1] == \
        "tcentrist,positive,0,0.25"


@settings(max_examples=40, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(2, 12), st.integers(1, 9)),
              elements=st.integers(0, 30)))
def test_intersection_gram_matches_direct(X):
    gram = intersection_gram(X)
    direct = np.array([[np.minimum(a, b).sum() for b in X] for a in X], dtype=np.float64)
    np.testing.assert_array_equal(gram, direct)


def test_diff_scores_fast_path_equals_direct(rng):
    X = rng.integers(0, 20, size=(40, 12)).astype(np.float64)
    y = np.array([1] * 20 + [-1] * 20)
    fast = diff_scores(LabeledFeatureSet(X, y), 1)
    slow = diff_scores(LabeledFeatureSet(X + 1e-9, y), 1)  # non-integral: direct path
    direct = [diff_score(X[i], np.delete(X[:20], i, axis=0), X[20:]) for i in range(20)]
    np.testing.assert_array_equal(fast, direct)
    np.testing.assert_allclose(slow, direct, atol=1e-9)
    assert intersection_gram(X + 0.5) is None and intersection_gram(-X) is None
