import numpy as np
import pytest

from binreg import kernels
from binreg._jit import HAVE_NUMBA, numba_enabled

from oracles import all_partitions, partition_gain


def _tree(X, y, **kw):
    return kernels.grow_tree(X, -y, np.ones_like(y), **kw)


def test_env_flag(monkeypatch):
    monkeypatch.setenv("BINREG_DISABLE_NUMBA", "1")
    assert not numba_enabled()
    monkeypatch.setenv("BINREG_DISABLE_NUMBA", "0")
    assert numba_enabled() == HAVE_NUMBA


def test_four_point_split(use_numba):
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0.0, 0.0, 10.0, 10.0])
    feature, threshold, left, right, value, n, gain, *_ = _tree(X, y, max_depth=1, use_numba=use_numba)
    assert feature[0] == 0 and threshold[0] == 2.5
    assert value[left[0]] == 0.0 and value[right[0]] == 10.0
    # CART gain is half the SSE reduction: SSE 100 -> 0
    assert gain[0] == pytest.approx(50.0)


def test_root_split_is_best_partition(use_numba, rng):
    # any threshold split is a partition; the kernel must find the best one
    for _ in range(20):
        X = rng.integers(0, 4, (7, 2)).astype(float)
        g = rng.standard_normal(7)
        h = rng.uniform(0.5, 2.0, 7)
        out = kernels.grow_tree(X, g, h, max_depth=1, reg_lambda=1.0, use_numba=use_numba)
        best = -np.inf
        for j in range(2):
            for m in all_partitions(7):
                xs_l, xs_r = X[m, j], X[~m, j]
                if xs_l.max() < xs_r.min():   # threshold-realizable partition
                    best = max(best, partition_gain(g, h, m, 1.0, 0.0))
        if out[0][0] == -1:
            assert best <= 1e-12 * (np.abs(g).sum() ** 2 + 1)
        else:
            assert out[6][0] == pytest.approx(best, abs=1e-10)


def test_tie_break_lowest_feature_then_threshold(use_numba):
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    feature, threshold, *_ = _tree(X, y, max_depth=1, use_numba=use_numba)
    assert feature[0] == 0
    y2 = np.array([0.0, 1.0, 0.0, 1.0])  # symmetric thresholds 1.5 and 3.5 tie
    feature, threshold, *_ = _tree(X[:, :1].copy(), y2, max_depth=1, use_numba=use_numba)
    assert threshold[0] in (1.5, 2.5, 3.5)
    gains = {}
    for thr in (1.5, 2.5, 3.5):
        m = X[:, 0] <= thr
        gains[thr] = partition_gain(-y2, np.ones(4), m, 0.0, 0.0)
    top = max(gains.values())
    assert threshold[0] == min(t for t, gv in gains.items() if abs(gv - top) < 1e-12)


def test_constant_feature_gives_leaf(use_numba):
    X = np.ones((5, 1))
    y = np.arange(5.0)
    feature, *_ = _tree(X, y, use_numba=use_numba)
    assert feature.shape == (1,) and feature[0] == -1


def test_min_samples_leaf(use_numba, rng):
    X = rng.standard_normal((60, 3))
    y = rng.standard_normal(60)
    feature, threshold, left, right, value, n, *_ = _tree(X, y, min_samples_leaf=7, use_numba=use_numba)
    assert n[left == -1].min() >= 7
    assert n[0] == 60


def test_full_depth_memorizes(use_numba, rng):
    X = rng.standard_normal((40, 2))
    y = rng.standard_normal(40)
    out = _tree(X, y, use_numba=use_numba)
    pred = kernels.predict_tree(out[0], out[1], out[2], out[3], out[4], X, use_numba=use_numba)
    np.testing.assert_allclose(pred, y, atol=1e-12)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("max_features", [None, 2])
def test_paths_bit_identical(rng, max_features):
    X = np.round(rng.standard_normal((300, 5)), 1)
    g = rng.standard_normal(300)
    h = rng.uniform(0.1, 1.0, 300)
    rows = rng.integers(0, 300, 300)
    keys = rng.random((601, 5)) if max_features else None
    kw = dict(rows=rows, feat_keys=keys, max_features=max_features, max_depth=6,
              min_child_weight=0.5, reg_lambda=1.0, gamma=0.01)
    a = kernels.grow_tree(X, g, h, use_numba=True, **kw)
    b = kernels.grow_tree(X, g, h, use_numba=False, **kw)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)
    pa = kernels.predict_tree(*a[:5], X, use_numba=True)
    pb = kernels.predict_tree(*b[:5], X, use_numba=False)
    assert np.array_equal(pa, pb)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_lasso_paths_bit_identical(rng):
    Z = rng.standard_normal((80, 6))
    y = Z @ rng.standard_normal(6) + rng.standard_normal(80)
    a = kernels.lasso_cd(Z, y - y.mean(), 0.05, use_numba=True)
    b = kernels.lasso_cd(Z, y - y.mean(), 0.05, use_numba=False)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_lasso_soft_threshold_1d(use_numba):
    z = np.array([1.0, -1.0])
    y = np.array([2.0, -2.0])
    for alpha, expect in ((0.5, 1.5), (2.0, 0.0), (3.0, 0.0), (0.0, 2.0)):
        w, _, conv = kernels.lasso_cd(z[:, None], y, alpha, use_numba=use_numba)
        assert conv
        assert w[0] == pytest.approx(expect, abs=1e-12)


def test_apply_matches_manual_walk(use_numba, rng):
    X = rng.standard_normal((50, 3))
    y = rng.standard_normal(50)
    feature, threshold, left, right, *_ = _tree(X, y, max_depth=3, use_numba=use_numba)
    leaves = kernels.apply_tree(feature, threshold, left, right, X, use_numba=use_numba)
    for i in range(50):
        k = 0
        while left[k] != -1:
            k = left[k] if X[i, feature[k]] <= threshold[k] else right[k]
        assert leaves[i] == k
