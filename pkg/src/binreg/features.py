"""Feature encoding, target binning and importance-driven feature selection.

Target binning runs in three steps:

1. discretize the training target into ``n_bins`` bins and level-encode
   the labels (``price_bin``);
2. train a regressor on the features with ``price_bin`` as its target and
   predict a bin for every training row;
3. drop rows whose predicted bin falls outside Tukey fences, then add the
   predicted bin as the feature ``predicted_bin`` for the price model.

.. warning::
   The default ``paper_in_sample`` mode predicts step-2 bins with a model
   that saw those very rows, so the training ``predicted_bin`` is more
   accurate than it will be on unseen data: a form of target leakage. Use
   ``mode="out_of_fold"`` for leakage-safe training features.
"""
import copy
import datetime as _dt
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import ColumnRole, Column, SchemaError, make_column
from .eval import kfold_assignment, kfold_cv
from .models import RegressorSpec, feature_importance, fit_model
from .models.base import ImportanceVector  # noqa: F401  (re-exported)
from .outliers import TukeyParams, tukey_fences
from .stats import pearson, quantile

PREDICTED_BIN = "predicted_bin"
BIN_MODES = ("paper_in_sample", "out_of_fold")

_DATE_NAMES = {"sale_date": ("ys1", "ys2")}
_YEAR_NAMES = {"yrblt": ("yb1", "yb2")}


# ---------------------------------------------------------------------------
# encodings
# ---------------------------------------------------------------------------

@dataclass
class EncodingMap:
    column: str
    kind: str           # ordinal_label | date_split | mean_target
    mapping: dict

    def to_dict(self):
        return {"column": self.column, "kind": self.kind, "mapping": copy.deepcopy(self.mapping)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["column"], d["kind"], copy.deepcopy(d["mapping"]))


def _replace(t, source, new_cols):
    pos = t.names.index(source)
    cols = list(t.columns)
    cols[pos:pos + 1] = new_cols
    from .dataset import Table
    return Table(cols)


def encode_date(t, column, return_map=False):
    """Split a date column into two numeric columns.

    ISO dates (``date_feature``) become calendar year and month; a numeric
    year column becomes year and decade (``floor(year/10)``). ``sale_date``
    yields ``ys1``/``ys2`` and ``yrblt`` yields ``yb1``/``yb2``; other
    columns get ``<col>_y`` plus ``<col>_m`` or ``<col>_decade``.
    """
    col = t.column(column)
    if col.role is ColumnRole.DATE_FEATURE:
        mode = "date"
        names = _DATE_NAMES.get(column, (f"{column}_y", f"{column}_m"))
    elif col.is_numeric:
        mode = "year"
        names = _YEAR_NAMES.get(column, (f"{column}_y", f"{column}_decade"))
    else:
        raise SchemaError(f"column {column!r} is neither a date nor a numeric year")
    emap = EncodingMap(column, "date_split", {"mode": mode, "outputs": list(names)})
    out = apply_date_split(t, emap)
    return (out, emap) if return_map else out


def _parse_date(text, row):
    try:
        return _dt.date.fromisoformat(str(text).strip()[:10])
    except ValueError:
        raise ValueError(f"unparseable date {text!r} at row {row}") from None


def apply_date_split(t, emap):
    col = t.column(emap.column)
    a_name, b_name = emap.mapping["outputs"]
    n = t.n_rows
    a = np.full(n, np.nan)
    b = np.full(n, np.nan)
    miss = col.missing.copy()
    for i in range(n):
        if miss[i]:
            continue
        if emap.mapping["mode"] == "date":
            d = _parse_date(col.values[i], i)
            a[i], b[i] = d.year, d.month
        else:
            y = float(col.values[i])
            a[i], b[i] = y, math.floor(y / 10.0)
    integer = emap.mapping["mode"] == "date" or col.integer
    new = [Column(a_name, ColumnRole.NUMERIC_FEATURE, a, miss, integer),
           Column(b_name, ColumnRole.NUMERIC_FEATURE, b, miss, True)]
    return _replace(t, emap.column, new)


def ordinal_encode(t, column):
    """Map categories to dense codes 0..K-1 in first-appearance order."""
    col = t.column(column)
    cats = []
    seen = set()
    for i in range(t.n_rows):
        if col.missing[i]:
            continue
        v = col.cell_text(i)
        if v not in seen:
            seen.add(v)
            cats.append(v)
    emap = EncodingMap(column, "ordinal_label", {"categories": cats, "reserved_code": len(cats)})
    out, _ = apply_ordinal(t, emap)
    return out, emap


def apply_ordinal(t, emap):
    """Encode with a fitted map. Unseen categories get the reserved code.

    Returns ``(table, n_unseen)`` and warns when ``n_unseen > 0``.
    """
    col = t.column(emap.column)
    lookup = {c: i for i, c in enumerate(emap.mapping["categories"])}
    reserved = emap.mapping["reserved_code"]
    codes = np.full(t.n_rows, np.nan)
    unseen = 0
    for i in range(t.n_rows):
        if col.missing[i]:
            continue
        v = col.cell_text(i)
        if v in lookup:
            codes[i] = lookup[v]
        else:
            codes[i] = reserved
            unseen += 1
    if unseen:
        warnings.warn(f"{unseen} unseen categories in {emap.column!r} mapped to reserved code {reserved}",
                      RuntimeWarning, stacklevel=2)
    new = Column(emap.column, ColumnRole.NUMERIC_FEATURE, codes, col.missing.copy(), True)
    return t.with_column(new), unseen


def ordinal_decode(codes, emap):
    cats = emap.mapping["categories"]
    return [cats[int(c)] if 0 <= int(c) < len(cats) else None for c in codes]


def mean_target_encode(t, column, m=10.0):
    """Smoothed (m-estimate) mean-target encoding of a categorical column.

    ``enc(c) = (n_c * mean_c + m * prior) / (n_c + m)``; unseen categories
    get ``prior``, the overall target mean.
    """
    col = t.column(column)
    y = t.target()
    prior = float(y.mean())
    sums, counts = {}, {}
    for i in range(t.n_rows):
        if col.missing[i]:
            continue
        v = col.cell_text(i)
        sums[v] = sums.get(v, 0.0) + y[i]
        counts[v] = counts.get(v, 0) + 1
    table = {v: (sums[v] + m * prior) / (counts[v] + m) for v in sums}
    emap = EncodingMap(column, "mean_target", {"table": table, "prior": prior, "m": float(m)})
    return apply_mean_target(t, emap), emap


def apply_mean_target(t, emap):
    col = t.column(emap.column)
    table = emap.mapping["table"]
    prior = emap.mapping["prior"]
    vals = np.array([np.nan if col.missing[i] else table.get(col.cell_text(i), prior)
                     for i in range(t.n_rows)], dtype=float)
    return t.with_column(Column(emap.column, ColumnRole.NUMERIC_FEATURE, vals, col.missing.copy()))


def apply_encoding(t, emap):
    if emap.kind == "date_split":
        return apply_date_split(t, emap)
    if emap.kind == "ordinal_label":
        return apply_ordinal(t, emap)[0]
    if emap.kind == "mean_target":
        return apply_mean_target(t, emap)
    raise ValueError(f"unknown encoding kind {emap.kind!r}")


# ---------------------------------------------------------------------------
# target binning
# ---------------------------------------------------------------------------

@dataclass
class BinSpec:
    n_bins: int = 100
    strategy: str = "equal_width"     # equal_width | quantile
    edges: list = None

    def __post_init__(self):
        if int(self.n_bins) < 1:
            raise ValueError("n_bins must be >= 1")
        if self.strategy not in ("equal_width", "quantile"):
            raise ValueError(f"unknown binning strategy {self.strategy!r}")

    def to_dict(self):
        return {"n_bins": self.n_bins, "strategy": self.strategy,
                "edges": None if self.edges is None else [float(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d.get("n_bins", 100)), d.get("strategy", "equal_width"), d.get("edges"))


def bin_target(prices, spec):
    """Bin labels in ``[0, n_bins-1]``; learned edges are stored on ``spec``.

    ``equal_width``: ``floor(n_bins * (x - min)/(max - min))`` with the
    maximum clamped into the last bin. ``quantile``: edges at empirical
    quantiles ``i/n_bins`` (duplicate edges merged).
    """
    x = np.asarray(prices, dtype=float)
    if x.size == 0:
        raise ValueError("cannot bin an empty target")
    nb = int(spec.n_bins)
    if spec.strategy == "equal_width":
        lo, hi = float(x.min()), float(x.max())
        if not hi > lo:
            raise ValueError("equal-width binning of a constant target (zero width)")
        spec.edges = [lo + (hi - lo) * i / nb for i in range(nb)] + [hi]
        labels = np.floor(nb * (x - lo) / (hi - lo)).astype(np.int64)
        return np.clip(labels, 0, nb - 1)
    edges = np.unique([quantile(x, i / nb) for i in range(nb + 1)])
    spec.edges = [float(e) for e in edges]
    if edges.size < 2:
        return np.zeros(x.size, np.int64)
    labels = np.searchsorted(edges[1:-1], x, side="right")
    return np.clip(labels, 0, nb - 1).astype(np.int64)


def level_encode(labels):
    """Encode label values by their sorted rank among the distinct labels."""
    classes = np.unique(labels)
    return np.searchsorted(classes, labels).astype(np.int64), classes


@dataclass
class BinModel:
    spec: BinSpec
    bin_predictor: object           # TrainedModel
    mode: str
    removed_outliers: list
    features: list
    tukey: dict = field(default_factory=lambda: {"a": 0.25, "b": 0.75, "k": 1.5})
    classes: list = None
    # in-memory bookkeeping only (not serialized)
    train_predicted: np.ndarray = None
    fold_of_row: np.ndarray = None
    fold_train_rows: list = None
    outlier_report: object = None

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "bin_predictor": self.bin_predictor.to_dict(),
                "mode": self.mode, "removed_outliers": list(self.removed_outliers),
                "features": list(self.features), "tukey": dict(self.tukey),
                "classes": None if self.classes is None else [int(c) for c in self.classes]}

    @classmethod
    def from_dict(cls, d):
        from .models import TrainedModel
        return cls(BinSpec.from_dict(d["spec"]), TrainedModel.from_dict(d["bin_predictor"]),
                   d["mode"], list(d["removed_outliers"]), list(d["features"]),
                   dict(d.get("tukey", {})), d.get("classes"))


DEFAULT_BIN_PREDICTOR = {"algorithm": "gbt", "hyperparameters": {}}


def _clamp_bins(pred, n_bins):
    return np.clip(np.asarray(pred, float), 0.0, float(n_bins - 1))


def target_binning_fit(train, spec=None, predictor_spec=None, mode="paper_in_sample",
                       tukey=None, features=None, n_folds=5, seed=0):
    """Fit the three-step target-binning procedure on a training table.

    Returns ``(augmented_train, BinModel)``: the training rows that survive
    the step-3 Tukey screen, with the new feature ``predicted_bin`` and the
    original target. ``mode="out_of_fold"`` predicts each training row's
    bin with a model fitted on the other ``n_folds - 1`` folds (fold
    assignment seeded by ``seed``); the stored ``bin_predictor`` used at
    transform time is always fitted on all training rows.
    """
    if mode not in BIN_MODES:
        raise ValueError(f"mode must be one of {BIN_MODES}")
    spec = BinSpec() if spec is None else BinSpec(spec.n_bins, spec.strategy)
    tukey = TukeyParams(0.25, 0.75, 1.5) if tukey is None else tukey
    predictor_spec = RegressorSpec.from_dict(predictor_spec or DEFAULT_BIN_PREDICTOR)
    target = train.target_name
    if target is None:
        raise SchemaError("target binning needs a target column")
    feats = [f for f in (features or train.feature_names) if f not in (PREDICTED_BIN, target)]
    if not feats:
        raise SchemaError("no features to predict bins from")

    y = train.target()
    labels = bin_target(y, spec)
    price_bin, classes = level_encode(labels)

    from .dataset import Table
    X = train.matrix(feats)
    bin_table = Table([train.column(f) for f in feats]
                      + [make_column("price_bin", ColumnRole.TARGET, price_bin.astype(float))])
    predictor = fit_model(predictor_spec, bin_table, feats)

    fold_of_row = None
    fold_train_rows = None
    if mode == "paper_in_sample":
        pred = predictor.predict_matrix(X)
    else:
        n = train.n_rows
        if n < n_folds:
            raise ValueError(f"out_of_fold mode needs at least {n_folds} rows")
        fold_of_row = kfold_assignment(n, n_folds, seed)
        fold_train_rows = []
        pred = np.empty(n)
        for f in range(n_folds):
            tr = np.nonzero(fold_of_row != f)[0]
            te = np.nonzero(fold_of_row == f)[0]
            m = fit_model(predictor_spec, bin_table.take(tr), feats)
            pred[te] = m.predict_matrix(X[te])
            fold_train_rows.append(tr)
    pred = _clamp_bins(pred, spec.n_bins)

    report = tukey_fences(pred, tukey)
    report.column = PREDICTED_BIN
    keep = np.ones(train.n_rows, bool)
    keep[report.flagged] = False
    if not keep.any():
        raise ValueError("every training row was removed by the predicted-bin Tukey screen")
    aug = train.with_column(Column(PREDICTED_BIN, ColumnRole.NUMERIC_FEATURE, pred, None)).take(keep)
    model = BinModel(spec, predictor, mode, list(report.flagged), feats,
                     {"a": tukey.a, "b": tukey.b, "k": tukey.k}, [int(c) for c in classes],
                     train_predicted=pred, fold_of_row=fold_of_row,
                     fold_train_rows=fold_train_rows, outlier_report=report)
    return aug, model


def target_binning_transform(model, rows):
    """Append ``predicted_bin`` to unseen rows; never removes rows."""
    absent = [f for f in model.features if f not in rows]
    if absent:
        raise SchemaError(f"missing feature columns for bin prediction: {absent}")
    X = rows.matrix(model.features)
    pred = _clamp_bins(model.bin_predictor.predict_matrix(X), model.spec.n_bins)
    return rows.with_column(Column(PREDICTED_BIN, ColumnRole.NUMERIC_FEATURE, pred, None))


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------

def correlation_filter(t, target, threshold):
    """Split numeric features by ``|r(feature, target)| >= threshold``.

    Returns ``(retained, dropped)`` where ``dropped`` maps a name to its
    correlation (``None`` when undefined, e.g. a constant column). Identifier
    and appraisal_baseline columns are never features, so they appear in
    neither list. With ``threshold == 0`` nothing is dropped.
    """
    if target not in t:
        raise KeyError(f"unknown target column {target!r}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    tc = t.column(target)
    retained, dropped = [], {}
    for name in t.feature_names:
        c = t.column(name)
        ok = ~(c.missing | tc.missing)
        r = pearson(c.values[ok], tc.values[ok])
        if threshold == 0.0:
            retained.append(name)
        elif r is None or abs(r) < threshold:
            dropped[name] = r
        else:
            retained.append(name)
    return retained, dropped


@dataclass
class SelectionStep:
    features: list
    cv_r2: float
    dropped: str = None


def importance_elimination(train, model_spec, k_folds=5, tolerance=0.002, seed=0, features=None):
    """Backward elimination by model importance; returns every step taken.

    Starting from all features: fit, drop the least important feature
    (ties: the later one), score the reduced set by ``k_folds`` CV mean R^2,
    and continue while that score does not fall more than ``tolerance``
    below the previous step's.
    """
    spec = RegressorSpec.from_dict(model_spec)
    current = list(features or train.feature_names)
    if len(current) < 2:
        raise ValueError("importance selection needs at least 2 features")

    def score(names):
        r = kfold_cv(train, spec, k=k_folds, seed=seed, features=names).mean_r2
        return -np.inf if r is None else r

    prev = score(current)
    steps = [SelectionStep(list(current), prev)]
    while len(current) > 1:
        imp = feature_importance(fit_model(spec, train, current))
        s = imp.scores
        worst = max(range(len(current)), key=lambda i: (-s[i], i))
        cand = [f for i, f in enumerate(current) if i != worst]
        sc = score(cand)
        steps.append(SelectionStep(cand, sc, current[worst]))
        if sc < prev - tolerance:
            break
        current, prev = cand, sc
    return steps


def importance_select(train, model_spec, k_folds=5, tolerance=0.002, seed=0, features=None):
    """Feature set with the best CV score along the elimination path.

    Ties go to the smaller set.
    """
    steps = importance_elimination(train, model_spec, k_folds, tolerance, seed, features)
    best = steps[0]
    for st in steps[1:]:
        if st.cv_r2 >= best.cv_r2:
            best = st
    return list(best.features)
