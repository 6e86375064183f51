import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from potpot.baselines import (efficiency_index, mahalanobis_depth, spatial_depth, train_baseline,
                              train_knn_original, train_lda, train_qda)
from potpot.datagen import gen_normal_series
from potpot.potentials import LabeledDataset
from potpot.separators import SeparatorKind


def symmetric_pair():
    base = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    pts = np.vstack([base, base + [3.0, 0.0]])
    return LabeledDataset(pts, np.repeat([1, 2], 4))


def test_lda_boundary_at_midpoint():
    lda = train_lda(symmetric_pair())
    xs = np.column_stack([[1.49, 1.51], [0.0, 0.0]])
    assert lda.predict(xs).tolist() == [1, 2]
    s = lda.scores([[1.5, 0.3]])[0]
    assert s[0] == pytest.approx(s[1])


def test_qda_equals_lda_with_equal_covariances():
    data = symmetric_pair()
    grid = np.random.default_rng(0).uniform(-3, 6, size=(200, 2))
    assert np.array_equal(train_qda(data).predict(grid), train_lda(data).predict(grid))


def test_gaussian_baselines_on_1dist3():
    gs = gen_normal_series(1, "dist", 3, 5)
    for kind in ("lda", "qda", "knn"):
        err = float(np.mean(train_baseline(kind, gs.train).predict(gs.test.points) != gs.test.labels))
        assert err < 0.12


def test_bayes_baseline_needs_generator():
    gs = gen_normal_series(1, "dist", 3, 5)
    with pytest.raises(ValueError):
        train_baseline("bayes", gs.train)
    bayes = train_baseline("bayes", gs.train, gs)
    # equal covariances and priors: the bisector x = 1.5
    assert bayes.predict([[1.4, 7.0], [1.6, -7.0]]).tolist() == [1, 2]


def test_singular_covariance_warns():
    t = np.linspace(0, 1, 10)
    pts = np.vstack([np.column_stack([t, t]), np.column_stack([t, t]) + [0.5, -0.5]])
    data = LabeledDataset(pts, np.repeat([1, 2], 10))
    with pytest.warns(RuntimeWarning, match="singular"):
        train_qda(data)


def test_knn_original_loo_matches_recount():
    from potpot.bench.acceptance import brute_force_loo_errors

    rng = np.random.default_rng(9)
    pts = rng.normal(size=(40, 2)) @ np.array([[3.0, 0.5], [0.0, 0.4]])
    labels = np.where(pts[:, 0] + rng.normal(size=40) > 0, 1, 2)
    data = LabeledDataset(pts, labels)
    knn = train_knn_original(data, k_max=10)
    # Mahalanobis distances in the original coordinates rank neighbours like sphered ones
    prec = np.linalg.inv(np.cov(pts, rowvar=False))
    root = np.linalg.cholesky(prec)
    errors = brute_force_loo_errors(pts @ root, labels, data.priors(), 10)
    assert knn.k == int(np.argmin(errors)) + 1


def test_mahalanobis_depth_values():
    ref = np.random.default_rng(1).normal(size=(50, 2))
    mu = ref.mean(axis=0)
    assert mahalanobis_depth(mu, ref)[0] == pytest.approx(1.0)
    cov = np.cov(ref, rowvar=False)
    # a point at Mahalanobis distance 1 along the first eigenvector
    w, v = np.linalg.eigh(cov)
    x = mu + v[:, 0] * math.sqrt(w[0])
    assert mahalanobis_depth(x, ref)[0] == pytest.approx(0.5)


def test_spatial_depth_symmetric_and_far():
    ref = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert spatial_depth([0.0, 0.0], ref)[0] == pytest.approx(1.0)
    assert spatial_depth([1e6, 0.0], ref)[0] < 1e-6


@given(st.integers(0, 1000))
def test_depths_in_range(seed):
    rng = np.random.default_rng(seed)
    ref = rng.normal(size=(15, 2))
    x = rng.normal(scale=3, size=(10, 2))
    m = mahalanobis_depth(x, ref)
    s = spatial_depth(x, ref)
    assert np.all((m > 0) & (m <= 1))
    assert np.all((s >= -1e-12) & (s <= 1 + 1e-12))


def test_dd_mirror_tie():
    rng = np.random.default_rng(3)
    left = rng.normal(size=(20, 2)) + [-2, 0]
    data = LabeledDataset(np.vstack([left, left * [-1, 1]]), np.repeat([1, 2], 20))
    clf = train_baseline("dd-mahalanobis", data, separator=SeparatorKind("diagonal"))
    dd = clf.plot([[0.0, 0.5]])
    assert dd[0, 0] == pytest.approx(dd[0, 1])
    assert clf.predict([[0.0, 0.5]]).tolist() == [1]


def test_unknown_baseline():
    with pytest.raises(ValueError):
        train_baseline("svm", symmetric_pair())


@pytest.mark.parametrize("err, ref, expected", [(0.10, 0.10, 1.0), (0.069, 0.069, 1.0), (0.0, 0.05, 0.0),
                                                (0.069, 0.067, 0.069 / 0.067)])
def test_efficiency_index(err, ref, expected):
    idx = efficiency_index(err, ref)
    assert idx.defined
    assert idx.value == pytest.approx(expected)


def test_efficiency_index_zero_reference():
    assert efficiency_index(0, 0).value == 1.0
    idx = efficiency_index(0.1, 0)
    assert not idx.defined
    assert math.isinf(idx.value)
    assert efficiency_index(6.9, 6.7).value == pytest.approx(1.03, abs=0.005)
