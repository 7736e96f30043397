"""CART, random forest and second-order gradient-boosted trees.

All three share :func:`binreg.kernels.grow_tree`. A CART tree is the
boosting tree with ``g = -y``, ``h = 1`` and no regularization: its gain
is half the SSE reduction and its leaves hold the mean target.
"""
import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .base import ModelError, RegressorSpec, TrainedModel, make_meta

_FIELDS = ("feature", "threshold", "left", "right", "value", "n_samples", "gain", "sum_g", "sum_h")
_INT_FIELDS = ("feature", "left", "right", "n_samples")


@dataclass
class TreeNode:
    """Nested view of one node: a split when ``feature`` is set, else a leaf."""
    feature: str = None
    threshold: float = None
    left: "TreeNode" = None
    right: "TreeNode" = None
    weight: float = 0.0
    n_samples: int = 0

    @property
    def is_leaf(self):
        return self.feature is None


@dataclass(eq=False)
class Tree:
    """Flat array representation; node 0 is the root, leaves have ``left == -1``.

    ``value`` is the unscaled node weight ``-G/(H+lambda)``; boosting
    applies its learning rate at prediction time.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    gain: np.ndarray
    sum_g: np.ndarray
    sum_h: np.ndarray

    @classmethod
    def from_arrays(cls, arrays):
        return cls(*arrays)

    @property
    def n_nodes(self):
        return int(self.feature.shape[0])

    @property
    def is_leaf(self):
        return self.left == -1

    @property
    def n_leaves(self):
        return int(self.is_leaf.sum())

    def depth(self):
        d = np.zeros(self.n_nodes, np.int64)
        for i in range(self.n_nodes):
            if self.left[i] != -1:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def apply(self, X):
        return kernels.apply_tree(self.feature, self.threshold, self.left, self.right, X)

    def predict(self, X):
        return kernels.predict_tree(self.feature, self.threshold, self.left, self.right,
                                    self.value, X)

    def gain_by_feature(self, n_features):
        out = np.zeros(n_features)
        internal = ~self.is_leaf
        np.add.at(out, self.feature[internal], self.gain[internal])
        return out

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in _FIELDS}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: np.asarray(d[k], dtype=np.int64 if k in _INT_FIELDS else float)
                      for k in _FIELDS})

    def to_nodes(self, feature_names, node=0):
        if self.left[node] == -1:
            return TreeNode(weight=float(self.value[node]), n_samples=int(self.n_samples[node]))
        return TreeNode(feature=feature_names[self.feature[node]],
                        threshold=float(self.threshold[node]),
                        left=self.to_nodes(feature_names, int(self.left[node])),
                        right=self.to_nodes(feature_names, int(self.right[node])),
                        weight=float(self.value[node]), n_samples=int(self.n_samples[node]))

    @classmethod
    def from_nodes(cls, root, feature_names):
        """Build a tree from a hand-assembled :class:`TreeNode` graph."""
        cols = {k: [] for k in _FIELDS}
        index = {n: i for i, n in enumerate(feature_names)}

        def visit(nd):
            i = len(cols["feature"])
            for k in _FIELDS:
                cols[k].append(0)
            cols["n_samples"][i] = nd.n_samples
            cols["value"][i] = nd.weight
            if nd.is_leaf:
                cols["feature"][i] = cols["left"][i] = cols["right"][i] = -1
                return i
            cols["feature"][i] = index[nd.feature]
            cols["threshold"][i] = nd.threshold
            cols["left"][i] = visit(nd.left)
            cols["right"][i] = visit(nd.right)
            return i

        visit(root)
        return cls.from_dict(cols)


def _grow(X, g, h, rows=None, feat_keys=None, max_features=None, max_depth=None,
          min_samples_leaf=1, min_child_weight=0.0, reg_lambda=0.0, gamma=0.0):
    return Tree.from_arrays(kernels.grow_tree(
        X, g, h, rows=rows, feat_keys=feat_keys, max_features=max_features,
        max_depth=max_depth, min_samples_leaf=min_samples_leaf,
        min_child_weight=min_child_weight, reg_lambda=reg_lambda, gamma=gamma))


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ModelError("X must be 2-D with one row per target value")
    if X.shape[0] < 1:
        raise ModelError("cannot fit on zero rows")
    return X, y


def _names(feature_names, p):
    return list(feature_names) if feature_names is not None else [f"x{i}" for i in range(p)]


def _check_depth(max_depth):
    if max_depth is not None and int(max_depth) < 0:
        raise ModelError("max_depth must be >= 0 or None")
    return None if max_depth is None else int(max_depth)


def fit_cart(X, y, feature_names=None, max_depth=None, min_samples_leaf=1):
    """Greedy least-squares regression tree.

    Thresholds are midpoints between consecutive distinct values; rows
    with ``x <= threshold`` go left. Ties go to the lowest feature index,
    then the lowest threshold.
    """
    X, y = _check_xy(X, y)
    if int(min_samples_leaf) < 1:
        raise ModelError("min_samples_leaf must be >= 1")
    tree = _grow(X, -y, np.ones_like(y), max_depth=_check_depth(max_depth),
                 min_samples_leaf=int(min_samples_leaf))
    spec = RegressorSpec("cart", {"max_depth": max_depth, "min_samples_leaf": min_samples_leaf})
    return TrainedModel(spec, {"tree": tree}, _names(feature_names, X.shape[1]),
                        make_meta(0, X.shape[0], n_leaves=tree.n_leaves))


def fit_random_forest(X, y, feature_names=None, seed=0, n_trees=100, max_depth=None,
                      min_samples_leaf=1, feature_subset_size=None, bootstrap=True):
    """Bagged CART trees with a fresh random feature subset at every node.

    Tree ``i`` draws its bootstrap rows and node feature keys from an RNG
    seeded with ``(seed, i)``, so results do not depend on scheduling.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if int(n_trees) < 1:
        raise ModelError("n_trees must be >= 1")
    m = max(1, math.ceil(p / 3)) if feature_subset_size is None else int(feature_subset_size)
    if not 1 <= m <= p:
        raise ModelError(f"feature_subset_size must lie in [1, {p}]")
    depth = _check_depth(max_depth)
    g = -y
    h = np.ones(n)
    trees = []
    for i in range(int(n_trees)):
        rng = np.random.default_rng([int(seed), i])
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        keys = rng.random((2 * n + 1, p)) if m < p else None
        trees.append(_grow(X, g, h, rows=rows, feat_keys=keys, max_features=m,
                           max_depth=depth, min_samples_leaf=int(min_samples_leaf)))
    spec = RegressorSpec("random_forest", {"n_trees": n_trees, "max_depth": max_depth,
                                           "min_samples_leaf": min_samples_leaf,
                                           "feature_subset_size": feature_subset_size,
                                           "bootstrap": bootstrap}, seed)
    return TrainedModel(spec, {"trees": trees}, _names(feature_names, p),
                        make_meta(seed, n, feature_subset_size=m))


def fit_gbt(X, y, feature_names=None, seed=0, n_rounds=200, learning_rate=0.1, max_depth=4,
            reg_lambda=1.0, gamma=0.0, min_child_weight=1.0, early_stopping_rounds=None,
            validation_fraction=0.1, base_score=None):
    """Second-order boosted trees under squared-error loss.

    Per round, ``g = pred - y`` and ``h = 1``; each leaf gets
    ``w* = -G/(H + reg_lambda)`` and is added scaled by ``learning_rate``.
    With ``early_stopping_rounds``, a seeded ``validation_fraction`` of the
    rows is held out and boosting stops once held-out MSE has not improved
    for that many rounds; the model keeps the best prefix of trees.
    """
    X, y = _check_xy(X, y)
    n = X.shape[0]
    if int(n_rounds) < 1:
        raise ModelError("n_rounds must be >= 1")
    if not 0.0 < float(learning_rate) <= 1.0:
        raise ModelError("learning_rate must lie in (0, 1]")
    if float(reg_lambda) < 0 or float(gamma) < 0 or float(min_child_weight) < 0:
        raise ModelError("reg_lambda, gamma and min_child_weight must be >= 0")
    depth = _check_depth(max_depth)
    eta = float(learning_rate)

    if early_stopping_rounds:
        if not 0.0 < float(validation_fraction) < 1.0:
            raise ModelError("validation_fraction must lie in (0, 1)")
        perm = np.random.default_rng([int(seed), 7]).permutation(n)
        n_val = max(1, int(round(validation_fraction * n)))
        if n - n_val < 1:
            raise ModelError("validation split leaves no training rows")
        va, tr = np.sort(perm[:n_val]), np.sort(perm[n_val:])
        Xtr, ytr, Xva, yva = X[tr], y[tr], X[va], y[va]
    else:
        Xtr, ytr, Xva, yva = X, y, None, None

    base = float(np.mean(ytr)) if base_score is None else float(base_score)
    pred = np.full(ytr.shape[0], base)
    h = np.ones(ytr.shape[0])
    vpred = None if Xva is None else np.full(yva.shape[0], base)
    trees = []
    best_mse = np.inf
    best_rounds = 0
    stale = 0
    val_history = []
    for _ in range(int(n_rounds)):
        tree = _grow(Xtr, pred - ytr, h, max_depth=depth, min_child_weight=float(min_child_weight),
                     reg_lambda=float(reg_lambda), gamma=float(gamma))
        trees.append(tree)
        pred = pred + eta * tree.predict(Xtr)
        if vpred is not None:
            vpred = vpred + eta * tree.predict(Xva)
            mse = float(np.mean((vpred - yva) ** 2))
            val_history.append(mse)
            if mse < best_mse:
                best_mse, best_rounds, stale = mse, len(trees), 0
            else:
                stale += 1
                if stale >= int(early_stopping_rounds):
                    break
    if vpred is not None:
        trees = trees[:best_rounds]
    spec = RegressorSpec("gbt", {"n_rounds": n_rounds, "learning_rate": learning_rate,
                                 "max_depth": max_depth, "reg_lambda": reg_lambda, "gamma": gamma,
                                 "min_child_weight": min_child_weight,
                                 "early_stopping_rounds": early_stopping_rounds,
                                 "validation_fraction": validation_fraction,
                                 "base_score": base_score}, seed)
    extra = {"stopped_early": len(trees) < int(n_rounds)} if vpred is not None else {}
    return TrainedModel(spec, {"trees": trees, "base_score": base, "learning_rate": eta},
                        _names(feature_names, X.shape[1]),
                        make_meta(seed, n, rounds_used=len(trees), **extra))


def gbt_round_objective(g, h, leaf_index, weights, reg_lambda, gamma):
    """Second-order regularized objective of one boosting round.

    ``sum_i [g_i w_{q(i)} + h_i w_{q(i)}^2 / 2] + gamma*T + lambda*||w||^2/2``.
    """
    w_row = np.asarray(weights)[leaf_index]
    T = len(weights)
    return float(np.sum(g * w_row + 0.5 * h * w_row ** 2) + gamma * T
                 + 0.5 * reg_lambda * np.sum(np.asarray(weights) ** 2))
