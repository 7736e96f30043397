"""Univariate and regression-influence outlier detection.

Every detector returns an :class:`OutlierReport` recording the method, its
parameters, the bounds applied and the flagged row indices, so cleaning
steps can be audited after the fact.
"""
from dataclasses import dataclass, field

import numpy as np

from .stats import quantile

DEFAULT_TUKEY_LEVELS = (0.10, 0.90)
TEXTBOOK_TUKEY_LEVELS = (0.25, 0.75)


@dataclass(frozen=True)
class TukeyParams:
    a: float = DEFAULT_TUKEY_LEVELS[0]
    b: float = DEFAULT_TUKEY_LEVELS[1]
    k: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.a < 0.5:
            raise ValueError(f"lower quantile level a={self.a} must lie in (0, 0.5)")
        if not 0.5 < self.b < 1.0:
            raise ValueError(f"upper quantile level b={self.b} must lie in (0.5, 1)")
        if not self.k > 0:
            raise ValueError("fence multiplier k must be positive")


@dataclass
class OutlierReport:
    method: str
    params: dict
    flagged: list
    bounds: tuple
    n_rows: int
    per_row_score: list = None
    degenerate: bool = False
    column: str = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_scores=False):
        d = {"method": self.method, "column": self.column, "params": self.params,
             "bounds": list(self.bounds), "n_rows": self.n_rows,
             "n_flagged": len(self.flagged), "flagged": list(self.flagged),
             "degenerate": self.degenerate}
        d.update({k: v for k, v in self.extra.items()
                  if include_scores or not isinstance(v, list)})
        if include_scores and self.per_row_score is not None:
            d["per_row_score"] = list(self.per_row_score)
        return d


def _as_values(values):
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-D list of values")
    if np.isnan(x).any():
        raise ValueError("outlier detection input contains missing values")
    return x


def zscore_outliers(values, z_lo=-3.0, z_hi=3.0):
    """Flag rows whose standard score ``(x - mean)/std`` leaves ``[z_lo, z_hi]``."""
    x = _as_values(values)
    if x.size < 2:
        raise ValueError("z-score needs at least 2 values")
    if not z_lo < z_hi:
        raise ValueError("z_lo must be below z_hi")
    params = {"z_lo": z_lo, "z_hi": z_hi}
    sd = x.std(ddof=1)
    if sd == 0.0:
        return OutlierReport("zscore", params, [], (z_lo, z_hi), x.size,
                             per_row_score=[0.0] * x.size, degenerate=True)
    z = (x - x.mean()) / sd
    flagged = np.nonzero((z < z_lo) | (z > z_hi))[0]
    return OutlierReport("zscore", params, [int(i) for i in flagged], (z_lo, z_hi), x.size,
                         per_row_score=z.tolist())


def tukey_fences(values, params=None):
    """Flag rows outside ``[Q1 - k*IQR, Q3 + k*IQR]``.

    ``Q1`` and ``Q3`` are the ``a`` and ``b`` quantiles and
    ``IQR = Q3 - Q1``.
    """
    params = TukeyParams() if params is None else params
    x = _as_values(values)
    if x.size == 0:
        raise ValueError("Tukey fences of empty input")
    q1 = quantile(x, params.a)
    q3 = quantile(x, params.b)
    iqr = q3 - q1
    lo = q1 - params.k * iqr
    hi = q3 + params.k * iqr
    flagged = np.nonzero((x < lo) | (x > hi))[0]
    return OutlierReport("tukey", {"a": params.a, "b": params.b, "k": params.k},
                         [int(i) for i in flagged], (lo, hi), x.size,
                         degenerate=iqr == 0.0, extra={"q1": q1, "q3": q3, "iqr": iqr})


def _design(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise ValueError("X and y have different row counts")
    return np.column_stack([np.ones(n), X])


def cooks_distance(X, y, threshold=None):
    """Cook's distance of every row under an intercept-augmented OLS fit.

    ``D_i = e_i^2 / (p s^2) * h_ii / (1 - h_ii)^2`` with ``h_ii`` the
    leverage, ``p`` the number of fitted coefficients and ``s^2`` the
    residual mean square. Rows with ``D_i > threshold`` (default ``4/n``)
    are flagged. A perfect fit has every ``D_i = 0``.
    """
    y = _as_values(y)
    n = y.size
    A = _design(X, n)
    p = A.shape[1]
    if n <= p:
        raise ValueError(f"Cook's distance needs more rows ({n}) than coefficients ({p})")
    if np.linalg.matrix_rank(A) < p:
        raise ValueError("design matrix (with intercept) is rank deficient")
    Q, _ = np.linalg.qr(A)
    lev = np.einsum("ij,ij->i", Q, Q)
    fitted = Q @ (Q.T @ y)
    e = y - fitted
    sse = float(e @ e)
    scale = max(float(np.abs(y).max()), 1e-300)
    threshold = 4.0 / n if threshold is None else float(threshold)
    params = {"threshold": threshold, "p": p}
    if np.sqrt(sse / n) <= 1e-10 * scale:
        d = np.zeros(n)
        return OutlierReport("cooks", params, [], (threshold,), n, per_row_score=d.tolist(),
                             degenerate=True, extra={"leverage": lev.tolist()})
    s2 = sse / (n - p)
    if np.any(lev >= 1.0 - 1e-12):
        raise ValueError("a row has leverage 1; Cook's distance undefined")
    d = (e ** 2 / (p * s2)) * lev / (1.0 - lev) ** 2
    flagged = np.nonzero(d > threshold)[0]
    return OutlierReport("cooks", params, [int(i) for i in flagged], (threshold,), n,
                         per_row_score=d.tolist(), extra={"leverage": lev.tolist()})


def leverage(X):
    """Diagonal of the hat matrix of the intercept-augmented design."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    A = _design(X, n)
    Q, _ = np.linalg.qr(A)
    return np.einsum("ij,ij->i", Q, Q)
