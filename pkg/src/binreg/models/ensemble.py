"""Uniform-average voting and the appraisal-column baseline."""
import numpy as np

from ..dataset import ColumnRole
from .base import (DEFAULT_VOTING_MEMBERS, ModelError, RegressorSpec, TrainedModel, derive_seed,
                   make_meta)


def fit_voting(X, y, feature_names=None, seed=0, members=DEFAULT_VOTING_MEMBERS):
    """Fit every member on all rows; predict their arithmetic mean.

    A member without an explicit seed gets ``derive_seed(seed, index)``.
    """
    from .base import fit_model
    from ..dataset import Table, make_column

    members = [m if isinstance(m, RegressorSpec) else dict(m) for m in members]
    if len(members) < 2:
        raise ModelError("voting needs at least 2 members")
    X = np.asarray(X, dtype=float)
    names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(X.shape[1])]
    cols = [make_column(n, ColumnRole.NUMERIC_FEATURE, X[:, j]) for j, n in enumerate(names)]
    cols.append(make_column("__target__", ColumnRole.TARGET, np.asarray(y, float)))
    table = Table(cols)
    fitted = []
    for i, m in enumerate(members):
        if isinstance(m, RegressorSpec):
            spec = m
        else:
            spec = RegressorSpec.from_dict(dict(m, seed=m.get("seed", derive_seed(seed, i))))
        if spec.algorithm in ("voting", "baseline_column"):
            raise ModelError(f"voting member {i} cannot be {spec.algorithm}")
        try:
            fitted.append(fit_model(spec, table, features=names))
        except Exception as exc:
            raise ModelError(f"voting member {i} ({spec.algorithm}) failed: {exc}") from exc
    hp = {"members": [f.spec.to_dict() for f in fitted]}
    return TrainedModel(RegressorSpec("voting", hp, seed), {"members": fitted}, names,
                        make_meta(seed, X.shape[0]))


def fit_baseline_column(t, column=None):
    """Pass-through model predicting the county appraisal column."""
    if column is None:
        cands = t.names_with_role(ColumnRole.APPRAISAL_BASELINE)
        if not cands:
            raise ModelError("table has no appraisal_baseline column")
        column = cands[0]
    if column not in t:
        raise ModelError(f"baseline column {column!r} not in table")
    if t.column(column).role is not ColumnRole.APPRAISAL_BASELINE:
        raise ModelError(f"column {column!r} does not have role appraisal_baseline")
    return TrainedModel(RegressorSpec("baseline_column", {"column": column}),
                        {"column": column}, [column], make_meta(0, t.n_rows))
