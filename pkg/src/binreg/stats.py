"""Quantiles, column summaries and Pearson correlation."""
import csv
from dataclasses import dataclass

import numpy as np


def quantile(values, q):
    """Linear interpolation between order statistics at position ``q*(n-1)``.

    ``q=0`` gives the minimum and ``q=1`` the maximum. This single
    convention is used everywhere fences are computed.
    """
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("quantile of empty input")
    if np.isnan(x).any():
        raise ValueError("quantile input contains missing values")
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile level {q} outside [0, 1]")
    pos = q * (x.size - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, x.size - 1)
    frac = pos - lo
    if frac == 0.0:
        return float(x[lo])
    return float(x[lo] + frac * (x[hi] - x[lo]))


@dataclass
class ColumnSummary:
    name: str
    mean: float = None
    std: float = None
    min: float = None
    max: float = None
    missing_count: int = 0
    count: int = 0


def describe(t):
    """Per-column summary; moments only for numeric columns.

    ``std`` uses the n-1 denominator. Undefined moments are ``None``.
    """
    out = []
    for c in t.columns:
        s = ColumnSummary(c.name, missing_count=int(c.missing.sum()))
        s.count = len(c) - s.missing_count
        if c.is_numeric and s.count:
            v = c.values[~c.missing]
            s.mean = float(v.mean())
            s.min = float(v.min())
            s.max = float(v.max())
            if v.size > 1:
                s.std = float(v.std(ddof=1))
        out.append(s)
    return out


@dataclass
class CorrelationMatrix:
    names: list
    values: np.ndarray     # NaN where undefined; consult ``defined``
    defined: np.ndarray

    def get(self, a, b):
        i, j = self.names.index(a), self.names.index(b)
        return float(self.values[i, j]) if self.defined[i, j] else None

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(self.names))
            for i, n in enumerate(self.names):
                w.writerow([n] + [repr(float(self.values[i, j])) if self.defined[i, j] else ""
                                  for j in range(len(self.names))])


def pearson(x, y):
    """Pearson r of two equal-length arrays, ``None`` if either is constant."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.size < 2:
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx <= 0.0 or syy <= 0.0:
        return None
    r = float((dx @ dy) / np.sqrt(sxx * syy))
    return min(1.0, max(-1.0, r))


def pearson_matrix(t, columns):
    """Pairwise-complete Pearson correlation over numeric columns."""
    for c in columns:
        if c not in t:
            raise KeyError(f"unknown column {c!r}")
    cols = [t.column(c) for c in columns]
    for c in cols:
        if not c.is_numeric:
            raise TypeError(f"column {c.name!r} is not numeric")
    k = len(cols)
    vals = np.full((k, k), np.nan)
    defined = np.zeros((k, k), bool)
    for i in range(k):
        for j in range(i, k):
            ok = ~(cols[i].missing | cols[j].missing)
            if i == j:
                r = pearson(cols[i].values[ok], cols[i].values[ok])
                if r is not None:
                    r = 1.0
            else:
                r = pearson(cols[i].values[ok], cols[j].values[ok])
            if r is not None:
                vals[i, j] = vals[j, i] = r
                defined[i, j] = defined[j, i] = True
    return CorrelationMatrix(list(columns), vals, defined)
