"""Metrics, cross-validation, grid search, plot-data emitters and model comparison."""
import csv
import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import ColumnRole
from .models import (ModelError, RegressorSpec, derive_seed, fit_model, predict)
from .stats import describe, pearson_matrix


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSet:
    r2: float        # None when undefined (constant y_true, nonzero residuals)
    mse: float
    mae: float
    n: int

    def to_dict(self):
        return {"r2": self.r2, "mse": self.mse, "mae": self.mae, "n": self.n,
                "log10_mse": _log10(self.mse), "log10_mae": _log10(self.mae)}


def _log10(v):
    return None if v is None or v <= 0 else math.log10(v)


def metrics(y_true, y_pred):
    yt = np.asarray(y_true, dtype=float).ravel()
    yp = np.asarray(y_pred, dtype=float).ravel()
    if yt.shape != yp.shape:
        raise ValueError(f"length mismatch: {yt.size} vs {yp.size}")
    if yt.size == 0:
        raise ValueError("metrics of an empty sample")
    res = yt - yp
    ss_res = float(res @ res)
    ss_tot = float(((yt - yt.mean()) ** 2).sum())
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else None
    return MetricSet(r2, ss_res / yt.size, float(np.abs(res).mean()), int(yt.size))


# ---------------------------------------------------------------------------
# cross-validation
# ---------------------------------------------------------------------------

def kfold_assignment(n, k, seed=0):
    """Fold id per row: seeded permutation cut into contiguous slices.

    The first ``n % k`` folds hold one extra row. Depends only on
    ``(n, k, seed)``.
    """
    n, k = int(n), int(k)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of rows ({n})")
    perm = np.random.default_rng(int(seed)).permutation(n)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    fold = np.empty(n, np.int64)
    start = 0
    for f, s in enumerate(sizes):
        fold[perm[start:start + s]] = f
        start += s
    return fold


@dataclass
class CVResult:
    fold_scores: list
    mean_r2: float
    std_r2: float
    fold_assignment: np.ndarray

    @property
    def mean_mse(self):
        return float(np.mean([m.mse for m in self.fold_scores]))

    def to_dict(self):
        return {"mean_r2": self.mean_r2, "std_r2": self.std_r2, "mean_mse": self.mean_mse,
                "folds": [m.to_dict() for m in self.fold_scores]}


def _summarize(scores, fold):
    r2s = [m.r2 for m in scores if m.r2 is not None]
    mean = float(np.mean(r2s)) if r2s else None
    std = float(np.std(r2s)) if r2s else None
    return CVResult(scores, mean, std, fold)


def kfold_cv(t, spec, k=10, seed=0, features=None):
    """Refit ``spec`` on each of ``k`` training folds and score the held-out fold.

    Mean and (population) standard deviation are taken over the fold R^2
    values that are defined.
    """
    spec = RegressorSpec.from_dict(spec)
    fold = kfold_assignment(t.n_rows, k, seed)
    scores = []
    for f in range(int(k)):
        tr = np.nonzero(fold != f)[0]
        te = np.nonzero(fold == f)[0]
        test = t.take(te)
        model = fit_model(spec, t.take(tr), features)
        scores.append(metrics(test.target(), predict(model, test)))
    return _summarize(scores, fold)


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------

def grid_candidates(grid):
    """Cartesian product in sorted-key order, last key varying fastest."""
    if not grid:
        raise ValueError("empty grid")
    keys = sorted(grid)
    for k in keys:
        if len(grid[k]) == 0:
            raise ValueError(f"grid entry {k!r} has no values")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridSearchResult:
    candidates: list      # (params, mean cv r2)
    best: dict
    k_inner: int

    def to_dict(self):
        return {"candidates": [{"params": p, "mean_r2": s} for p, s in self.candidates],
                "best": self.best, "k_inner": self.k_inner}


def grid_search(t, spec, grid, k_inner=5, seed=0, features=None):
    """Score every candidate by ``k_inner``-fold CV mean R^2.

    All candidates share one fold assignment. Ties go to the candidate
    that comes first in grid order.
    """
    spec = RegressorSpec.from_dict(spec)
    cands = grid_candidates(grid)
    specs = [spec.with_params(**c) for c in cands]   # validates names up front
    out = []
    best, best_score = None, -np.inf
    for c, s in zip(cands, specs):
        r = kfold_cv(t, s, k=k_inner, seed=seed, features=features).mean_r2
        out.append((c, r))
        score = -np.inf if r is None else r
        if best is None or score > best_score:
            best, best_score = c, score
    return GridSearchResult(out, dict(best), int(k_inner))


@dataclass
class NestedCVResult:
    outer_scores: list
    best_params: list
    mean_r2: float
    std_r2: float
    fold_assignment: np.ndarray


def nested_cv(t, spec, grid, k_outer=10, k_inner=5, seed=0, features=None):
    """Outer ``k_outer``-fold evaluation of a grid search run inside each training fold.

    Inner folds are seeded with ``derive_seed(seed, outer_fold)``.
    """
    spec = RegressorSpec.from_dict(spec)
    fold = kfold_assignment(t.n_rows, k_outer, seed)
    scores, bests = [], []
    for f in range(int(k_outer)):
        train = t.take(np.nonzero(fold != f)[0])
        test = t.take(np.nonzero(fold == f)[0])
        gs = grid_search(train, spec, grid, k_inner=k_inner, seed=derive_seed(seed, f),
                         features=features)
        model = fit_model(spec.with_params(**gs.best), train, features)
        scores.append(metrics(test.target(), predict(model, test)))
        bests.append(gs.best)
    cv = _summarize(scores, fold)
    return NestedCVResult(scores, bests, cv.mean_r2, cv.std_r2, fold)


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------

@dataclass
class AlphaPath:
    alphas: list
    cv_mse: list
    nonzero: list
    chosen: float

    def records(self):
        return [{"alpha": a, "cv_mse": e, "nonzero": z}
                for a, e, z in zip(self.alphas, self.cv_mse, self.nonzero)]


def alpha_path(t, alphas, k=5, seed=0, features=None, tol=1e-9, max_iter=10000):
    """CV mean MSE of lasso along an ascending alpha grid.

    ``nonzero`` counts coefficients of the full-data fit at each alpha;
    ``chosen`` minimizes CV error (ties go to the smaller alpha).
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError("empty alpha grid")
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha grid must be sorted ascending")
    errs, nz = [], []
    for a in alphas:
        spec = RegressorSpec("lasso", {"alpha": a, "tol": tol, "max_iter": max_iter})
        errs.append(kfold_cv(t, spec, k=k, seed=seed, features=features).mean_mse)
        full = fit_model(spec, t, features)
        nz.append(int(np.count_nonzero(full.parameters["coef"])))
    chosen = alphas[int(np.argmin(errs))]
    return AlphaPath(alphas, errs, nz, chosen)


def residuals_data(model, train=None, test=None):
    """One record per row: ``split, actual, predicted, residual`` (actual - predicted)."""
    out = []
    for tag, tbl in (("train", train), ("test", test)):
        if tbl is None:
            continue
        yhat = predict(model, tbl)
        y = tbl.target()
        for a, p in zip(y, yhat):
            out.append({"split": tag, "actual": float(a), "predicted": float(p),
                        "residual": float(a - p)})
    return out


@dataclass
class PredictionErrorData:
    records: list
    slope: float
    intercept: float
    identity: tuple = (1.0, 0.0)


def prediction_error_data(model, test):
    """Actual vs predicted with the least-squares line of predicted on actual."""
    yhat = np.asarray(predict(model, test), float)
    y = test.target()
    recs = [{"actual": float(a), "predicted": float(p)} for a, p in zip(y, yhat)]
    yc = y - y.mean()
    sxx = float(yc @ yc)
    slope = float(yc @ (yhat - yhat.mean())) / sxx if sxx > 0 else 0.0
    intercept = float(yhat.mean() - slope * y.mean()) if y.size else 0.0
    return PredictionErrorData(recs, slope, intercept)


def learning_curve(t, spec, fractions, k=5, seed=0, features=None):
    """Train and CV R^2 on seeded subsamples.

    A fraction ``f`` keeps the first ``round(f * n)`` rows of one seeded
    permutation, re-sorted into table order; ``f = 1`` is the full table.
    """
    spec = RegressorSpec.from_dict(spec)
    fractions = [float(f) for f in fractions]
    if not fractions or any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise ValueError("fractions must be strictly ascending")
    perm = np.random.default_rng(int(seed)).permutation(t.n_rows)
    out = []
    for f in fractions:
        m = int(round(f * t.n_rows))
        if m < max(2, int(k)):
            raise ValueError(f"fraction {f} leaves {m} rows, too few for {k}-fold CV")
        sub = t.take(np.sort(perm[:m]))
        model = fit_model(spec, sub, features)
        train_r2 = metrics(sub.target(), predict(model, sub)).r2
        cv = kfold_cv(sub, spec, k=k, seed=seed, features=features)
        out.append({"fraction": f, "n_rows": m, "train_r2": train_r2, "cv_r2": cv.mean_r2})
    return out


@dataclass
class Profile:
    bedrooms: dict = None          # value -> count
    months: dict = None            # 1..12 -> count
    summary: list = None           # ColumnSummary list
    correlation: object = None     # CorrelationMatrix
    notices: list = field(default_factory=list)


def _month_values(t):
    if "ys2" in t:
        c = t.column("ys2")
        return [int(v) for v, m in zip(c.values, c.missing) if not m]
    for name in t.names_with_role(ColumnRole.DATE_FEATURE):
        c = t.column(name)
        return [int(str(v)[5:7]) for v, m in zip(c.values, c.missing) if not m]
    return None


def profile(t, bedroom_column="rmbed"):
    """Bedroom histogram, monthly sale counts, summaries and correlations."""
    p = Profile()
    if bedroom_column in t:
        c = t.column(bedroom_column)
        vals = c.values[~c.missing]
        keys, counts = np.unique(vals, return_counts=True)
        p.bedrooms = {int(k) if float(k).is_integer() else float(k): int(n)
                      for k, n in zip(keys, counts)}
    else:
        p.notices.append(f"no {bedroom_column!r} column; bedroom histogram skipped")
    months = _month_values(t)
    if months is None:
        p.notices.append("no sale-month column; monthly counts skipped")
    else:
        p.months = {m: 0 for m in range(1, 13)}
        for m in months:
            p.months[m] += 1
    p.summary = describe(t)
    numeric = [c.name for c in t.columns if c.is_numeric]
    p.correlation = pearson_matrix(t, numeric)
    return p


def write_records_csv(records, path, header=None):
    header = header or (list(records[0]) if records else [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: _cell(r.get(k)) for k in header})


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


# ---------------------------------------------------------------------------
# model comparison
# ---------------------------------------------------------------------------

#: Roster order and display names
ROSTER = (
    ("baseline_column", "VCPA baseline"),
    ("ols", "Linear Regression"),
    ("linear_svr", "SVR"),
    ("cart", "Decision Tree"),
    ("random_forest", "Random Forest"),
    ("gbt", "Gradient Boosting"),
    ("lasso", "Lasso"),
    ("voting", "Voting Regressor"),
)
_ORDER = {alg: i for i, (alg, _) in enumerate(ROSTER)}
DISPLAY = dict(ROSTER)


@dataclass
class ComparisonRow:
    name: str
    algorithm: str
    before: MetricSet = None
    after: MetricSet = None
    fit_seconds: dict = field(default_factory=dict)
    predict_seconds: dict = field(default_factory=dict)
    error: str = None
    predictions: dict = field(default_factory=dict)   # arm -> test predictions


@dataclass
class ComparisonReport:
    rows: list
    dataset_fingerprint: str
    config: dict
    bin_summary: dict = None

    def deterministic_dict(self):
        rows = []
        for r in self.rows:
            rows.append({"name": r.name, "algorithm": r.algorithm,
                         "before": None if r.before is None else r.before.to_dict(),
                         "after": None if r.after is None else r.after.to_dict(),
                         "error": r.error})
        return {"dataset_fingerprint": self.dataset_fingerprint, "config": self.config,
                "binning": self.bin_summary, "rows": rows}

    def to_dict(self):
        d = self.deterministic_dict()
        d["nondeterministic"] = {
            "timings": [{"name": r.name, "fit_seconds": r.fit_seconds,
                         "predict_seconds": r.predict_seconds} for r in self.rows]}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self):
        head = ["#", "Model", "R2 before", "MSE before", "MAE before", "R2 after", "MSE after",
                "MAE after", "log10 MSE b/a", "log10 MAE b/a"]
        lines = []
        for i, r in enumerate(self.rows, 1):
            b, a = r.before, r.after
            lines.append([str(i), r.name, _fmt(b, "r2"), _fmt(b, "mse"), _fmt(b, "mae"),
                          _fmt(a, "r2"), _fmt(a, "mse"), _fmt(a, "mae"),
                          f"{_fmtlog(b, 'mse')}/{_fmtlog(a, 'mse')}",
                          f"{_fmtlog(b, 'mae')}/{_fmtlog(a, 'mae')}"])
            if r.error:
                lines[-1][1] += f" (error: {r.error})"
        widths = [max(len(x) for x in col) for col in zip(head, *lines)]
        fmt = lambda row: "  ".join(c.ljust(w) if j < 2 else c.rjust(w)
                                    for j, (c, w) in enumerate(zip(row, widths)))
        out = [fmt(head), "  ".join("-" * w for w in widths)]
        out += [fmt(row) for row in lines]
        return "\n".join(out) + "\n"


def _fmt(m, attr):
    if m is None:
        return "-"
    v = getattr(m, attr)
    if v is None:
        return "undef"
    return f"{v:.4f}" if attr == "r2" else f"{v:.1f}"


def _fmtlog(m, attr):
    v = None if m is None else _log10(getattr(m, attr))
    return "-" if v is None else f"{v:.2f}"


def roster_sort(specs):
    return sorted(specs, key=lambda s: _ORDER.get(s.algorithm, len(_ORDER)))


def _fingerprint(*tables):
    h = hashlib.sha256()
    for t in tables:
        h.update(t.fingerprint().encode())
    return h.hexdigest()


def compare_models(train, test, specs, bin_spec=None, mode="paper_in_sample",
                   predictor_spec=None, include_baseline=True, features=None, seed=0,
                   config=None, bin_tukey=None):
    """Before/after target-binning comparison, one row per model.

    Target binning is fitted once on ``train`` and shared by every model's
    after-binning arm. The appraisal baseline only gets a before cell.
    A failing model records its error in its row.
    """
    from .features import PREDICTED_BIN, target_binning_fit, target_binning_transform

    specs = [RegressorSpec.from_dict(s) for s in specs]
    if not specs:
        raise ValueError("no model specs to compare")
    if include_baseline and not any(s.algorithm == "baseline_column" for s in specs):
        specs = [RegressorSpec("baseline_column")] + specs
    specs = roster_sort(specs)
    feats = list(features or train.feature_names)

    bin_error = None
    try:
        aug_train, bin_model = target_binning_fit(train, bin_spec, predictor_spec, mode,
                                                  tukey=bin_tukey, features=feats, seed=seed)
        aug_test = target_binning_transform(bin_model, test)
        bin_summary = {"mode": mode, "n_bins": bin_model.spec.n_bins,
                       "strategy": bin_model.spec.strategy,
                       "predictor": bin_model.bin_predictor.spec.to_dict(),
                       "tukey": dict(bin_model.tukey),
                       "rows_removed": len(bin_model.removed_outliers),
                       "train_rows_after": aug_train.n_rows}
    except Exception as exc:  # recorded; every after-cell then reports it
        bin_error = f"target binning failed: {exc}"
        bin_summary = {"mode": mode, "error": bin_error}
    after_feats = feats + [PREDICTED_BIN]

    y_test = test.target()
    rows = []
    for s in specs:
        row = ComparisonRow(DISPLAY.get(s.algorithm, s.algorithm), s.algorithm)
        rows.append(row)
        arms = [("before", train, test, feats)]
        if s.algorithm != "baseline_column":
            arms.append(("after", None if bin_error else aug_train,
                         None if bin_error else aug_test, after_feats))
        for arm, tr, te, names in arms:
            if tr is None:
                row.error = bin_error
                continue
            try:
                t0 = time.perf_counter()
                model = fit_model(s, tr, None if s.algorithm == "baseline_column" else names)
                t1 = time.perf_counter()
                yhat = predict(model, te)
                t2 = time.perf_counter()
            except (ModelError, ValueError, np.linalg.LinAlgError) as exc:
                row.error = f"{arm}: {exc}"
                continue
            row.fit_seconds[arm] = t1 - t0
            row.predict_seconds[arm] = t2 - t1
            row.predictions[arm] = np.asarray(yhat, float)
            setattr(row, arm, metrics(y_test, yhat))
    cfg = dict(config or {})
    cfg.setdefault("specs", [s.to_dict() for s in specs])
    cfg.setdefault("mode", mode)
    cfg.setdefault("seed", seed)
    return ComparisonReport(rows, _fingerprint(train, test), cfg, bin_summary)


def default_roster(seed=0):
    """The eight models of the comparison table, baseline first."""
    return [
        RegressorSpec("baseline_column"),
        RegressorSpec("ols"),
        RegressorSpec("linear_svr", {"C": 100.0, "epsilon": 0.0}),
        RegressorSpec("cart", {"max_depth": 10, "min_samples_leaf": 5}),
        RegressorSpec("random_forest", {"n_trees": 100, "max_depth": 12, "min_samples_leaf": 2},
                      seed),
        RegressorSpec("gbt", {"n_rounds": 300, "learning_rate": 0.1, "max_depth": 4}, seed),
        RegressorSpec("lasso", {"alpha": 100.0}),
        RegressorSpec("voting", {}, seed),
    ]
