"""Column-oriented tables, CSV I/O, train/test splitting and synthetic data."""
import csv
import datetime as _dt
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "?"})


class ColumnRole(str, Enum):
    IDENTIFIER = "identifier"
    NUMERIC_FEATURE = "numeric_feature"
    CATEGORICAL_FEATURE = "categorical_feature"
    DATE_FEATURE = "date_feature"
    TARGET = "target"
    APPRAISAL_BASELINE = "appraisal_baseline"


NUMERIC_ROLES = frozenset({ColumnRole.NUMERIC_FEATURE, ColumnRole.TARGET,
                           ColumnRole.APPRAISAL_BASELINE})
FEATURE_ROLES = frozenset({ColumnRole.NUMERIC_FEATURE, ColumnRole.CATEGORICAL_FEATURE,
                           ColumnRole.DATE_FEATURE})


class SchemaError(ValueError):
    pass


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Column:
    """One named column.

    Numeric roles hold ``float64`` values; the other roles hold text in
    an object array. ``missing`` is the authoritative missing-cell marker;
    the value stored under a missing cell is meaningless (NaN or "").
    ``integer`` makes the CSV writer render numeric cells without a
    fractional part.
    """

    name: str
    role: ColumnRole
    values: np.ndarray
    missing: np.ndarray
    integer: bool = False

    def __post_init__(self):
        role = ColumnRole(self.role)
        object.__setattr__(self, "role", role)
        vals = np.asarray(self.values, dtype=float if role in NUMERIC_ROLES else object)
        miss = np.zeros(vals.shape[0], bool) if self.missing is None else np.asarray(self.missing, bool)
        if vals.ndim != 1 or miss.shape != vals.shape:
            raise ValueError(f"column {self.name!r}: values and missing mask must be 1-D and aligned")
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "missing", _readonly(miss))

    @property
    def is_numeric(self):
        return self.role in NUMERIC_ROLES

    def __len__(self):
        return self.values.shape[0]

    def take(self, idx):
        return Column(self.name, self.role, self.values[idx], self.missing[idx], self.integer)

    def with_role(self, role):
        return make_column(self.name, role, self.values, self.missing, self.integer)

    def cell_text(self, i):
        if self.missing[i]:
            return ""
        v = self.values[i]
        if not self.is_numeric:
            return str(v)
        if self.integer:
            return str(int(v))
        return repr(float(v))


def make_column(name, role, values, missing=None, integer=False):
    """Build a column, coercing values to the role's storage type."""
    role = ColumnRole(role)
    values = np.asarray(values)
    if missing is None:
        missing = np.zeros(values.shape[0], bool)
    if role in NUMERIC_ROLES and values.dtype == object:
        out = np.full(values.shape[0], np.nan)
        missing = np.array(missing, bool)
        for i, v in enumerate(values):
            if missing[i]:
                continue
            try:
                out[i] = float(v)
            except (TypeError, ValueError):
                missing[i] = True
        values = out
    elif role not in NUMERIC_ROLES and values.dtype != object:
        if np.issubdtype(values.dtype, np.floating) and integer:
            values = np.array([str(int(v)) if not m else "" for v, m in zip(values, missing)], dtype=object)
        elif np.issubdtype(values.dtype, np.floating):
            values = np.array([repr(float(v)) if not m else "" for v, m in zip(values, missing)], dtype=object)
        else:
            values = values.astype(str).astype(object)
    return Column(name, role, values, missing, integer)


class Table:
    """Immutable ordered collection of equal-length named columns."""

    def __init__(self, columns):
        columns = tuple(columns)
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names: {dup}")
        lengths = {len(c) for c in columns}
        if len(lengths) > 1:
            raise SchemaError(f"columns have unequal lengths: {sorted(lengths)}")
        targets = [c.name for c in columns if c.role is ColumnRole.TARGET]
        if len(targets) > 1:
            raise SchemaError(f"more than one target column: {targets}")
        self._columns = columns
        self._index = {c.name: i for i, c in enumerate(columns)}
        self.n_rows = lengths.pop() if lengths else 0

    # -- access -------------------------------------------------------------
    @property
    def columns(self):
        return self._columns

    @property
    def names(self):
        return [c.name for c in self._columns]

    def __contains__(self, name):
        return name in self._index

    def __len__(self):
        return self.n_rows

    def __repr__(self):
        return f"Table(n_rows={self.n_rows}, columns={self.names})"

    def column(self, name):
        try:
            return self._columns[self._index[name]]
        except KeyError:
            raise KeyError(f"unknown column {name!r}") from None

    __getitem__ = column

    def roles(self):
        return {c.name: c.role.value for c in self._columns}

    def names_with_role(self, *roles):
        roles = {ColumnRole(r) for r in roles}
        return [c.name for c in self._columns if c.role in roles]

    @property
    def target_name(self):
        t = self.names_with_role(ColumnRole.TARGET)
        return t[0] if t else None

    @property
    def feature_names(self):
        """Numeric feature columns: what models consume."""
        return self.names_with_role(ColumnRole.NUMERIC_FEATURE)

    def numeric(self, name):
        """Values of a numeric column; raises if any cell is missing."""
        col = self.column(name)
        if not col.is_numeric:
            raise TypeError(f"column {name!r} is not numeric (role {col.role.value})")
        if col.missing.any():
            raise ValueError(f"column {name!r} has a missing cell at row {int(np.argmax(col.missing))}")
        return col.values

    def matrix(self, names):
        if not names:
            return np.zeros((self.n_rows, 0))
        return np.column_stack([self.numeric(n) for n in names]).astype(float)

    def target(self):
        if self.target_name is None:
            raise SchemaError("table has no target column")
        return self.numeric(self.target_name)

    def row_missing(self):
        if not self._columns:
            return np.zeros(self.n_rows, bool)
        return np.logical_or.reduce([c.missing for c in self._columns])

    # -- derivation -----------------------------------------------------------
    def take(self, idx):
        idx = np.asarray(idx)
        if idx.dtype == bool:
            idx = np.nonzero(idx)[0]
        return Table(c.take(idx) for c in self._columns)

    def select(self, names):
        return Table(self.column(n) for n in names)

    def drop(self, names):
        names = set(names)
        return Table(c for c in self._columns if c.name not in names)

    def with_column(self, col, position=None):
        """Return a table with ``col`` added, or replacing a same-named column."""
        cols = list(self._columns)
        if col.name in self._index:
            cols[self._index[col.name]] = col
        elif position is None:
            cols.append(col)
        else:
            cols.insert(position, col)
        return Table(cols)

    def with_role(self, name, role):
        return self.with_column(self.column(name).with_role(role))

    def row_keys(self, names=None):
        """Hashable per-row tuples of cell text (missing cells as None)."""
        cols = self._columns if names is None else [self.column(n) for n in names]
        return [tuple(None if c.missing[i] else c.cell_text(i) for c in cols)
                for i in range(self.n_rows)]

    def fingerprint(self):
        return hashlib.sha256(to_csv_text(self).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

@dataclass
class LoadReport:
    path: str
    n_rows: int
    missing_count: dict = field(default_factory=dict)
    unparseable: dict = field(default_factory=dict)
    extra_columns: list = field(default_factory=list)

    @property
    def total_missing(self):
        return sum(self.missing_count.values())


def load_schema(path):
    """Read a JSON column->role map."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: schema must be a JSON object mapping column to role")
    try:
        return {k: ColumnRole(v) for k, v in raw.items()}
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def default_schema():
    """The Volusia County (Table-1) column roles shipped with the package."""
    text = resources.files("binreg.data").joinpath("volusia_schema.json").read_text("utf-8")
    return {k: ColumnRole(v) for k, v in json.loads(text).items()}


def _is_int_text(s):
    s = s.strip()
    if s[:1] in "+-":
        s = s[1:]
    return s.isdigit()


def _parse_column(name, role, cells, report):
    n = len(cells)
    missing = np.zeros(n, bool)
    if role not in NUMERIC_ROLES:
        vals = np.empty(n, dtype=object)
        for i, c in enumerate(cells):
            if c.strip().lower() in MISSING_TOKENS:
                missing[i] = True
                vals[i] = ""
            else:
                vals[i] = c
        report.missing_count[name] = int(missing.sum())
        return Column(name, role, vals, missing)
    vals = np.full(n, np.nan)
    integer = True
    bad = 0
    for i, c in enumerate(cells):
        if c.strip().lower() in MISSING_TOKENS:
            missing[i] = True
            continue
        try:
            v = float(c)
        except ValueError:
            missing[i] = True
            bad += 1
            continue
        if not math.isfinite(v):
            missing[i] = True
            bad += 1
            continue
        vals[i] = v
        integer = integer and _is_int_text(c)
    report.missing_count[name] = int(missing.sum())
    if bad:
        report.unparseable[name] = bad
    return Column(name, role, vals, missing, integer and not missing.all())


def _infer_role(cells):
    for c in cells:
        if c.strip().lower() in MISSING_TOKENS:
            continue
        try:
            float(c)
        except ValueError:
            return ColumnRole.CATEGORICAL_FEATURE
    return ColumnRole.NUMERIC_FEATURE


def read_csv(path, schema=None, allow_empty=False, require=None):
    """Load a CSV file, returning ``(Table, LoadReport)``.

    ``schema`` maps column names to roles; every schema column must be
    present in the header (or only the ``require`` subset when given).
    Header columns absent from the schema get an inferred role
    (numeric_feature when every cell parses as a number, otherwise
    categorical_feature). Missing tokens (empty, NA, N/A, NaN, null, None, ?)
    and unparseable numeric cells become missing markers.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: header row missing")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body and not allow_empty:
        raise SchemaError(f"{path}: zero data rows")
    schema = {} if schema is None else {k: ColumnRole(v) for k, v in schema.items()}
    needed = list(schema) if require is None else list(require)
    absent = [c for c in needed if c not in header]
    if absent:
        raise SchemaError(f"{path}: columns missing from header: {absent}")
    width = len(header)
    for lineno, r in enumerate(body, start=2):
        if len(r) != width:
            raise SchemaError(f"{path}: line {lineno} has {len(r)} fields, expected {width}")
    report = LoadReport(path=str(path), n_rows=len(body))
    cols = []
    for j, name in enumerate(header):
        cells = [r[j] for r in body]
        if name in schema:
            role = schema[name]
        else:
            role = _infer_role(cells)
            report.extra_columns.append(name)
        cols.append(_parse_column(name, role, cells, report))
    return Table(cols), report


def load_csv(path, schema=None, allow_empty=False):
    return read_csv(path, schema, allow_empty=allow_empty)[0]


def to_csv_text(t):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(t.names)
    cols = t.columns
    for i in range(t.n_rows):
        writer.writerow([c.cell_text(i) for c in cols])
    return buf.getvalue()


def write_csv(t, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(t))


def write_schema(t, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(t.roles(), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

@dataclass
class SplitResult:
    train: Table
    test: Table
    train_index: np.ndarray
    test_index: np.ndarray
    leakage_dropped: list


def split_train_test(t, test_fraction=0.2, seed=0, leakage_guard=True):
    """Seeded holdout split.

    ``round(test_fraction * n)`` rows go to test. With ``leakage_guard``,
    test rows whose feature vector equals some train row's are removed from
    test and listed (original row indices) in ``leakage_dropped``.
    """
    n = t.n_rows
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n_test = int(round(test_fraction * n))
    if n_test < 1 or n_test > n - 1:
        raise ValueError(f"test_fraction={test_fraction} leaves an empty train or test set for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    dropped = []
    if leakage_guard:
        feats = t.names_with_role(*FEATURE_ROLES)
        keys = t.row_keys(feats)
        seen = {keys[i] for i in train_idx}
        keep = [i for i in test_idx if keys[i] not in seen]
        dropped = [int(i) for i in test_idx if keys[i] in seen]
        test_idx = np.array(keep, dtype=np.int64)
    return SplitResult(t.take(train_idx), t.take(test_idx), train_idx, test_idx, dropped)


# ---------------------------------------------------------------------------
# synthetic generator
# ---------------------------------------------------------------------------

@dataclass
class SynthColumn:
    name: str
    role: str
    mean: float = 0.0
    std: float = 0.0
    distribution: str = "normal"   # normal | lognormal | uniform_int | date
    loading: float = 0.0           # weight on the shared latent factor
    decimals: int = 2              # -1 keeps full precision; 0 writes integers
    clip_min: float = None


@dataclass
class GroundTruth:
    coefficients: dict = field(default_factory=dict)   # price units per feature std
    noise_std: float = 0.0
    nonlinearity: str = "none"                          # none | interaction
    interaction: tuple = ()                            # (feature_a, feature_b, coefficient)
    date_trend: float = 0.0                             # price units per year since start
    baseline_corr: float = 0.9                          # corr(appraisal, truth)


@dataclass
class Corruption:
    duplicate_rate: float = 0.0
    null_rate: float = 0.0
    outlier_rate: float = 0.0
    outlier_scale: float = 4.0


@dataclass
class SynthSpec:
    columns: list
    ground_truth: GroundTruth = field(default_factory=GroundTruth)
    corruption: Corruption = field(default_factory=Corruption)
    seed: int = 0
    date_start: str = "2015-01-01"
    date_end: str = "2019-11-13"
    month_weights: list = None

    def validate(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in SynthSpec")
        for c in self.columns:
            ColumnRole(c.role)
            if c.std < 0:
                raise ValueError(f"column {c.name!r}: negative std")
            if c.distribution not in ("normal", "lognormal", "uniform_int", "date"):
                raise ValueError(f"column {c.name!r}: unknown distribution {c.distribution!r}")
            if c.distribution == "lognormal" and c.mean <= 0:
                raise ValueError(f"column {c.name!r}: lognormal needs a positive mean")
            if not -1.0 <= c.loading <= 1.0:
                raise ValueError(f"column {c.name!r}: loading must lie in [-1, 1]")
        cr = self.corruption
        for k in ("duplicate_rate", "null_rate", "outlier_rate"):
            v = getattr(cr, k)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{k}={v} outside [0, 1)")
        if cr.outlier_scale <= 1.0:
            raise ValueError("outlier_scale must exceed 1")
        if cr.duplicate_rate + cr.null_rate + cr.outlier_rate >= 1.0:
            raise ValueError("corruption rates must sum to less than 1")
        gt = self.ground_truth
        if gt.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if gt.nonlinearity not in ("none", "interaction"):
            raise ValueError(f"unknown nonlinearity {gt.nonlinearity!r}")
        byname = {c.name: c for c in self.columns}
        for f in gt.coefficients:
            if f not in byname:
                raise ValueError(f"ground-truth coefficient for unknown column {f!r}")
        if gt.nonlinearity == "interaction":
            if len(gt.interaction) != 3 or any(f not in byname for f in gt.interaction[:2]):
                raise ValueError("interaction must be (feature_a, feature_b, coefficient) over known columns")
        if sum(c.role == ColumnRole.TARGET.value for c in self.columns) != 1:
            raise ValueError("SynthSpec needs exactly one target column")
        if self.month_weights is not None and len(self.month_weights) != 12:
            raise ValueError("month_weights must have 12 entries")
        return self

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        allowed = {"columns", "ground_truth", "corruption", "seed", "date_start", "date_end", "month_weights"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown SynthSpec keys: {sorted(unknown)}")
        cols = [SynthColumn(**c) for c in d.pop("columns")]
        gt = d.pop("ground_truth", {}) or {}
        if "interaction" in gt:
            gt = dict(gt, interaction=tuple(gt["interaction"]))
        return cls(columns=cols, ground_truth=GroundTruth(**gt),
                   corruption=Corruption(**(d.pop("corruption", {}) or {})), **d).validate()

    def to_dict(self):
        from dataclasses import asdict
        d = asdict(self)
        d["ground_truth"]["interaction"] = list(self.ground_truth.interaction)
        return d


def load_synth_spec(path=None):
    if path is None:
        text = resources.files("binreg.data").joinpath("volusia_synth.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return SynthSpec.from_dict(json.loads(text))


@dataclass
class CorruptionLog:
    duplicates: list = field(default_factory=list)   # [row, source_row]
    nulls: list = field(default_factory=list)        # [row, column]
    outliers: list = field(default_factory=list)     # rows whose target was scaled
    month_counts: dict = field(default_factory=dict)
    seed: int = 0
    n_rows: int = 0

    def to_dict(self):
        return {"seed": self.seed, "n_rows": self.n_rows,
                "duplicates": self.duplicates, "nulls": self.nulls,
                "outliers": self.outliers, "month_counts": self.month_counts}


def _round(x, decimals):
    if decimals < 0:
        return x
    return np.round(x, decimals)


def synthesize_dataset(spec, n_rows, return_log=False):
    """Draw a Table-1-shaped synthetic table.

    Features share one Gaussian latent factor (per-column ``loading``) so
    they are correlated like real appraisal data, while each keeps its
    marginal mean and std. The target is

        mean + sum_j coef_j * (x_j - mean_j) / std_j  [+ interaction]
             + date_trend * years_since_start + N(0, noise_std)

    and the noiseless part is returned as ``truth``. The appraisal column
    is drawn with correlation ``baseline_corr`` to the truth. Corruption
    (duplicates, then nulls, then target outliers) touches disjoint rows
    and is recorded in the returned log.

    Returns ``(table, truth)`` or ``(table, truth, log)``.
    """
    spec.validate()
    n = int(n_rows)
    if n < 1:
        raise ValueError("n_rows must be >= 1")
    rng = np.random.default_rng(spec.seed)
    latent = rng.standard_normal(n)
    gt = spec.ground_truth

    values = {}
    std_scores = {}
    int_cols = set()
    date_years = None
    month_counts = {}
    target_col = None
    baseline_cols = []
    for c in spec.columns:
        role = ColumnRole(c.role)
        if role is ColumnRole.TARGET:
            target_col = c
            continue
        if role is ColumnRole.APPRAISAL_BASELINE:
            baseline_cols.append(c)
            continue
        if c.distribution == "date":
            start = _dt.date.fromisoformat(spec.date_start)
            end = _dt.date.fromisoformat(spec.date_end)
            dates, years = _draw_dates(rng, n, start, end, spec.month_weights)
            values[c.name] = np.array([d.isoformat() for d in dates], dtype=object)
            date_years = years
            for d in dates:
                month_counts[d.month] = month_counts.get(d.month, 0) + 1
            continue
        if c.distribution == "uniform_int":
            half = c.std * math.sqrt(3.0)
            lo, hi = int(round(c.mean - half)), int(round(c.mean + half))
            hi = max(hi, lo + n)
            vals = lo + rng.choice(hi - lo, size=n, replace=False)
            values[c.name] = vals.astype(float)
            std_scores[c.name] = (vals - c.mean) / c.std if c.std > 0 else np.zeros(n)
            int_cols.add(c.name)
            continue
        e = rng.standard_normal(n)
        z = c.loading * latent + math.sqrt(1.0 - c.loading ** 2) * e
        if c.distribution == "lognormal":
            s2 = math.log1p((c.std / c.mean) ** 2)
            mu = math.log(c.mean) - s2 / 2.0
            x = np.exp(mu + math.sqrt(s2) * z)
        else:
            x = c.mean + c.std * z
        if c.clip_min is not None:
            x = np.maximum(x, c.clip_min)
        x = _round(x, c.decimals)
        if c.decimals == 0:
            int_cols.add(c.name)
        values[c.name] = x
        std_scores[c.name] = (x - c.mean) / c.std if c.std > 0 else np.zeros(n)

    if target_col is None:
        raise ValueError("SynthSpec has no target column")
    truth = np.full(n, float(target_col.mean))
    for f, coef in gt.coefficients.items():
        if f not in std_scores:
            raise ValueError(f"ground-truth coefficient on non-numeric column {f!r}")
        truth = truth + coef * std_scores[f]
    if gt.nonlinearity == "interaction":
        a, b, coef = gt.interaction
        za, zb = std_scores[a], std_scores[b]
        truth = truth + coef * (za * zb - _latent_corr(spec, a, b))
    if date_years is not None and gt.date_trend:
        truth = truth + gt.date_trend * (date_years - date_years.mean())
    y = truth + (rng.standard_normal(n) * gt.noise_std if gt.noise_std > 0 else 0.0)
    y = _round(y, target_col.decimals)
    if gt.noise_std == 0 and target_col.decimals >= 0:
        truth = _round(truth, target_col.decimals)
    values[target_col.name] = y
    if target_col.decimals == 0:
        int_cols.add(target_col.name)

    tz = (truth - truth.mean()) / truth.std() if truth.std() > 0 else np.zeros(n)
    for c in baseline_cols:
        rho = gt.baseline_corr
        e = rng.standard_normal(n)
        x = c.mean + c.std * (rho * tz + math.sqrt(max(0.0, 1.0 - rho ** 2)) * e)
        values[c.name] = _round(x, c.decimals)
        if c.decimals == 0:
            int_cols.add(c.name)

    log = CorruptionLog(seed=spec.seed, n_rows=n,
                        month_counts={int(k): int(v) for k, v in sorted(month_counts.items())})
    missing = {c.name: np.zeros(n, bool) for c in spec.columns}
    cr = spec.corruption
    n_dup = int(round(cr.duplicate_rate * n))
    n_null = int(round(cr.null_rate * n))
    n_out = int(round(cr.outlier_rate * n))
    if n_dup + n_null + n_out:
        crng = np.random.default_rng([spec.seed, 1])
        n_src = min(n_dup, n - n_dup - n_null - n_out)
        chosen = crng.permutation(n)
        dup_rows = np.sort(chosen[:n_dup])
        null_rows = np.sort(chosen[n_dup:n_dup + n_null])
        out_rows = np.sort(chosen[n_dup + n_null:n_dup + n_null + n_out])
        pool = chosen[n_dup + n_null + n_out:]
        if n_dup and n_src < 1:
            raise ValueError("too few rows left to act as duplicate sources")
        sources = crng.choice(pool, size=n_dup, replace=True) if n_dup else np.array([], int)
        for r, src in zip(dup_rows, sources):
            for name, v in values.items():
                v[r] = v[src]
            truth[r] = truth[src]
            log.duplicates.append([int(r), int(src)])
        feat_cols = [c.name for c in spec.columns
                     if ColumnRole(c.role) in FEATURE_ROLES]
        for r in null_rows:
            name = feat_cols[int(crng.integers(len(feat_cols)))]
            missing[name][r] = True
            log.nulls.append([int(r), name])
        tname = target_col.name
        for r in out_rows:
            values[tname][r] = _round(values[tname][r] * cr.outlier_scale, target_col.decimals)
            log.outliers.append(int(r))
        if date_years is not None:
            log.month_counts = _count_months(values, spec)

    cols = []
    for c in spec.columns:
        role = ColumnRole(c.role)
        vals = values[c.name]
        if role in NUMERIC_ROLES:
            col = Column(c.name, role, np.where(missing[c.name], np.nan, vals), missing[c.name],
                         integer=c.name in int_cols)
        else:
            col = make_column(c.name, role, vals, missing[c.name], integer=c.name in int_cols)
            col = Column(c.name, role, np.where(missing[c.name], "", col.values).astype(object),
                         missing[c.name])
        cols.append(col)
    table = Table(cols)
    if return_log:
        return table, truth, log
    return table, truth


def _count_months(values, spec):
    counts = {}
    for c in spec.columns:
        if c.distribution == "date":
            for s in values[c.name]:
                m = int(s[5:7])
                counts[m] = counts.get(m, 0) + 1
    return {k: counts[k] for k in sorted(counts)}


def _latent_corr(spec, a, b):
    byname = {c.name: c for c in spec.columns}
    return byname[a].loading * byname[b].loading


def _draw_dates(rng, n, start, end, month_weights):
    days = np.arange((end - start).days + 1)
    all_dates = [start + _dt.timedelta(days=int(d)) for d in days]
    if month_weights is None:
        w = np.ones(len(all_dates))
    else:
        mw = np.asarray(month_weights, float)
        w = np.array([mw[d.month - 1] for d in all_dates])
    w = w / w.sum()
    pick = rng.choice(len(all_dates), size=n, p=w)
    dates = [all_dates[i] for i in pick]
    years = pick / 365.25
    return dates, years
