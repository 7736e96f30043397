"""Shared fit/predict contract for every regressor."""
import copy
import datetime as _dt
from dataclasses import dataclass, field

import numpy as np

ALGORITHMS = ("ols", "lasso", "cart", "random_forest", "gbt", "linear_svr", "voting",
              "baseline_column")

DEFAULT_VOTING_MEMBERS = (
    {"algorithm": "random_forest"},
    {"algorithm": "lasso"},
    {"algorithm": "gbt"},
)

#: Full hyperparameter set and defaults, per algorithm.
DEFAULTS = {
    "ols": {},
    "lasso": {"alpha": 1.0, "tol": 1e-9, "max_iter": 10000},
    "cart": {"max_depth": None, "min_samples_leaf": 1},
    "random_forest": {"n_trees": 100, "max_depth": None, "min_samples_leaf": 1,
                      "feature_subset_size": None, "bootstrap": True},
    "gbt": {"n_rounds": 200, "learning_rate": 0.1, "max_depth": 4, "reg_lambda": 1.0,
            "gamma": 0.0, "min_child_weight": 1.0, "early_stopping_rounds": None,
            "validation_fraction": 0.1, "base_score": None},
    "linear_svr": {"C": 1.0, "epsilon": 0.0, "max_iter": 5000, "tol": 1e-6},
    "voting": {"members": [dict(m) for m in DEFAULT_VOTING_MEMBERS]},
    "baseline_column": {"column": None},
}

LINEAR_ALGORITHMS = ("ols", "lasso", "linear_svr")


class ModelError(ValueError):
    pass


class MissingFeatureError(ModelError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing feature columns: {self.missing}")


def derive_seed(master, index):
    """Deterministic child seed for unit ``index`` of a seeded computation."""
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1)[0])


@dataclass(frozen=True)
class RegressorSpec:
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in DEFAULTS:
            raise ModelError(f"unknown algorithm {self.algorithm!r}; choose from {list(ALGORITHMS)}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.algorithm])
        if unknown:
            raise ModelError(f"unknown hyperparameters for {self.algorithm}: {sorted(unknown)}")
        object.__setattr__(self, "hyperparameters", dict(self.hyperparameters))

    def params(self):
        p = copy.deepcopy(DEFAULTS[self.algorithm])
        p.update(copy.deepcopy(self.hyperparameters))
        return p

    def with_params(self, **kw):
        hp = dict(self.hyperparameters)
        hp.update(kw)
        return RegressorSpec(self.algorithm, hp, self.seed)

    def to_dict(self):
        return {"algorithm": self.algorithm, "hyperparameters": copy.deepcopy(self.hyperparameters),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, RegressorSpec):
            return d
        unknown = set(d) - {"algorithm", "hyperparameters", "seed"}
        if unknown:
            raise ModelError(f"unknown RegressorSpec keys: {sorted(unknown)}")
        return cls(d["algorithm"], dict(d.get("hyperparameters") or {}), int(d.get("seed", 0)))


@dataclass
class TrainedModel:
    """A fitted estimator.

    ``parameters`` depends on the algorithm: ``coef``/``intercept`` for
    linear models, ``tree`` for CART, ``trees`` for forests and boosting
    (plus ``base_score``/``learning_rate``), ``members`` for voting and
    ``column`` for the appraisal baseline.
    """

    spec: RegressorSpec
    parameters: dict
    feature_names: list
    training_meta: dict = field(default_factory=dict)

    @property
    def algorithm(self):
        return self.spec.algorithm

    def predict_matrix(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ModelError(f"expected a matrix with {len(self.feature_names)} columns")
        alg = self.algorithm
        P = self.parameters
        if X.shape[0] == 0:
            return np.zeros(0)
        if alg in LINEAR_ALGORITHMS:
            return X @ P["coef"] + P["intercept"]
        if alg == "cart":
            return P["tree"].predict(X)
        if alg == "random_forest":
            acc = np.zeros(X.shape[0])
            for t in P["trees"]:
                acc += t.predict(X)
            return acc / len(P["trees"])
        if alg == "gbt":
            acc = np.full(X.shape[0], P["base_score"])
            eta = P["learning_rate"]
            for t in P["trees"]:
                acc += eta * t.predict(X)
            return acc
        if alg == "voting":
            members = P["members"]
            acc = np.zeros(X.shape[0])
            for m in members:
                acc += m.predict_matrix(X)
            return acc / len(members)
        if alg == "baseline_column":
            return X[:, 0].copy()
        raise ModelError(f"cannot predict with algorithm {alg!r}")

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "feature_names": list(self.feature_names),
                "parameters": _params_to_json(self.algorithm, self.parameters),
                "training_meta": dict(self.training_meta)}

    @classmethod
    def from_dict(cls, d):
        spec = RegressorSpec.from_dict(d["spec"])
        return cls(spec, _params_from_json(spec.algorithm, d["parameters"]),
                   list(d["feature_names"]), dict(d.get("training_meta", {})))


def _params_to_json(alg, P):
    if alg in LINEAR_ALGORITHMS:
        out = {k: v for k, v in P.items() if k not in ("coef", "feature_std")}
        out["coef"] = [float(v) for v in P["coef"]]
        out["intercept"] = float(P["intercept"])
        out["feature_std"] = [float(v) for v in P["feature_std"]]
        return out
    if alg == "cart":
        return {"tree": P["tree"].to_dict()}
    if alg == "random_forest":
        return {"trees": [t.to_dict() for t in P["trees"]]}
    if alg == "gbt":
        return {"base_score": float(P["base_score"]), "learning_rate": float(P["learning_rate"]),
                "trees": [t.to_dict() for t in P["trees"]]}
    if alg == "voting":
        return {"members": [m.to_dict() for m in P["members"]]}
    if alg == "baseline_column":
        return {"column": P["column"]}
    raise ModelError(f"cannot serialize algorithm {alg!r}")


def _params_from_json(alg, P):
    from .trees import Tree
    if alg in LINEAR_ALGORITHMS:
        out = dict(P)
        out["coef"] = np.asarray(P["coef"], dtype=float)
        out["intercept"] = float(P["intercept"])
        out["feature_std"] = np.asarray(P["feature_std"], dtype=float)
        return out
    if alg == "cart":
        return {"tree": Tree.from_dict(P["tree"])}
    if alg == "random_forest":
        return {"trees": [Tree.from_dict(t) for t in P["trees"]]}
    if alg == "gbt":
        return {"base_score": float(P["base_score"]), "learning_rate": float(P["learning_rate"]),
                "trees": [Tree.from_dict(t) for t in P["trees"]]}
    if alg == "voting":
        return {"members": [TrainedModel.from_dict(m) for m in P["members"]]}
    if alg == "baseline_column":
        return {"column": P["column"]}
    raise ModelError(f"cannot deserialize algorithm {alg!r}")


def make_meta(seed, n_rows, rounds_used=None, **extra):
    meta = {"seed": int(seed), "n_rows": int(n_rows),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    if rounds_used is not None:
        meta["rounds_used"] = int(rounds_used)
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# table-level entry points
# ---------------------------------------------------------------------------

def _feature_matrix(rows, names):
    absent = [n for n in names if n not in rows]
    if absent:
        raise MissingFeatureError(absent)
    return rows.matrix(names)


def predict(model, rows):
    """Predict every row of a Table; feature columns are matched by name."""
    X = _feature_matrix(rows, model.feature_names)
    return model.predict_matrix(X)


def fit_model(spec, table, features=None):
    """Fit ``spec`` on a Table's numeric features (or the named subset)."""
    from . import ensemble, linear, trees
    spec = RegressorSpec.from_dict(spec)
    params = spec.params()
    if spec.algorithm == "baseline_column":
        return ensemble.fit_baseline_column(table, params["column"])
    names = list(table.feature_names if features is None else features)
    if not names:
        raise ModelError("no feature columns to fit on")
    X = _feature_matrix(table, names)
    y = table.target()
    fitters = {
        "ols": linear.fit_ols,
        "lasso": linear.fit_lasso,
        "linear_svr": linear.fit_linear_svr,
        "cart": trees.fit_cart,
        "random_forest": trees.fit_random_forest,
        "gbt": trees.fit_gbt,
        "voting": ensemble.fit_voting,
    }
    fn = fitters[spec.algorithm]
    if spec.algorithm in ("ols",):
        return fn(X, y, feature_names=names)
    if spec.algorithm in ("lasso", "linear_svr", "cart"):
        return fn(X, y, feature_names=names, **params)
    return fn(X=X, y=y, feature_names=names, seed=spec.seed, **params)


# ---------------------------------------------------------------------------
# importances
# ---------------------------------------------------------------------------

@dataclass
class ImportanceVector:
    names: list
    scores: np.ndarray

    def as_dict(self):
        return {n: float(s) for n, s in zip(self.names, self.scores)}

    def ranked(self):
        order = sorted(range(len(self.names)), key=lambda i: (-self.scores[i], i))
        return [(self.names[i], float(self.scores[i])) for i in order]

    def argmax(self):
        return self.ranked()[0][0]


def _normalize(raw):
    raw = np.maximum(np.asarray(raw, dtype=float), 0.0)
    total = raw.sum()
    if total <= 0.0:
        # no split anywhere / all-zero coefficients: no feature is preferred
        return np.full(raw.size, 1.0 / raw.size) if raw.size else raw
    return raw / total


def _raw_importance(model):
    alg = model.algorithm
    P = model.parameters
    p = len(model.feature_names)
    if alg in LINEAR_ALGORITHMS:
        return np.abs(P["coef"]) * P["feature_std"]
    if alg == "cart":
        return P["tree"].gain_by_feature(p)
    if alg in ("random_forest", "gbt"):
        acc = np.zeros(p)
        for t in P["trees"]:
            acc += t.gain_by_feature(p)
        return acc
    raise ModelError(f"{alg} has no native importances")


def feature_importance(model):
    """Normalized per-feature importance (scores sum to 1).

    Trees and forests: summed SSE reduction of the splits on a feature;
    boosting: summed split gain; linear models: ``|coef| * std(feature)``;
    voting: mean of the members' normalized vectors.
    """
    alg = model.algorithm
    if alg == "baseline_column":
        raise ModelError("the appraisal baseline has no feature importances")
    if alg == "voting":
        acc = np.zeros(len(model.feature_names))
        members = model.parameters["members"]
        for m in members:
            acc += feature_importance(m).scores
        return ImportanceVector(list(model.feature_names), _normalize(acc / len(members)))
    return ImportanceVector(list(model.feature_names), _normalize(_raw_importance(model)))
