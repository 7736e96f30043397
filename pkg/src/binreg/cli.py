"""Command-line pipeline: generate, clean, profile, train, evaluate, compare, predict.

Exit codes: 0 success, 2 configuration error, 3 data or I/O error.
"""
import argparse
import copy
import csv
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as F
from .dataset import (ColumnRole, SchemaError, default_schema, load_schema, load_synth_spec,
                      read_csv, split_train_test, synthesize_dataset, write_csv, write_schema)
from .eval import (alpha_path, compare_models, default_roster, grid_search, learning_curve,
                   metrics, nested_cv, prediction_error_data, profile, residuals_data,
                   write_records_csv)
from .models import (MissingFeatureError, ModelError, RegressorSpec, TrainedModel, fit_model,
                     predict)
from .outliers import TukeyParams, cooks_distance, tukey_fences, zscore_outliers

FORMAT_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class CleaningConfig:
    drop_nulls: bool = True
    dedup: bool = True
    outlier_method: str = "tukey"           # tukey | zscore | cooks | none
    tukey: dict = field(default_factory=lambda: {"a": 0.10, "b": 0.90, "k": 1.5})
    zscore: dict = field(default_factory=lambda: {"z_lo": -3.0, "z_hi": 3.0})
    cooks_threshold: float = None           # None: 4/n
    correlation_threshold: float = 0.05


@dataclass
class EncodingConfig:
    date_columns: list = field(default_factory=lambda: ["sale_date", "yrblt"])
    categorical: str = "ordinal"            # ordinal | mean_target | drop
    mean_target_m: float = 10.0


@dataclass
class BinningConfig:
    enabled: bool = True
    n_bins: int = 100
    strategy: str = "equal_width"
    predictor: dict = field(default_factory=lambda: copy.deepcopy(F.DEFAULT_BIN_PREDICTOR))
    mode: str = "paper_in_sample"
    tukey: dict = field(default_factory=lambda: {"a": 0.25, "b": 0.75, "k": 1.5})


@dataclass
class SelectionConfig:
    enabled: bool = False
    k_folds: int = 5
    tolerance: float = 0.002


@dataclass
class CVConfig:
    k_outer: int = 10
    k_inner: int = 5
    nested: bool = False


@dataclass
class SplitConfig:
    test_fraction: float = 0.2
    seed: int = 0
    leakage_guard: bool = True


@dataclass
class CompareConfig:
    roster: list = None                     # None: the default eight-model roster
    sample_rows: int = 50
    alpha_grid: list = field(default_factory=lambda: [1.0, 10.0, 100.0, 1000.0, 10000.0])
    learning_curve: bool = False
    learning_fractions: list = field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1.0])


@dataclass
class PipelineConfig:
    schema: str = None
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    binning: BinningConfig = field(default_factory=BinningConfig)
    model: dict = field(default_factory=lambda: {"algorithm": "gbt", "hyperparameters": {}, "seed": 0})
    grid: dict = field(default_factory=dict)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    cv: CVConfig = field(default_factory=CVConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    output_dir: str = None

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        cfg = _build(cls, d, "config")
        cfg.validate()
        return cfg

    def validate(self):
        c = self.cleaning
        if c.outlier_method not in ("tukey", "zscore", "cooks", "none"):
            raise ConfigError(f"cleaning.outlier_method: unknown method {c.outlier_method!r}")
        try:
            TukeyParams(**c.tukey)
            TukeyParams(**self.binning.tukey)
            F.BinSpec(self.binning.n_bins, self.binning.strategy)
            RegressorSpec.from_dict(self.model).with_params(**{k: v[0] for k, v in self.grid.items()})
            RegressorSpec.from_dict(self.binning.predictor)
            for s in self.compare.roster or []:
                RegressorSpec.from_dict(s)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 <= c.correlation_threshold <= 1.0:
            raise ConfigError("cleaning.correlation_threshold must lie in [0, 1]")
        if self.binning.mode not in F.BIN_MODES:
            raise ConfigError(f"binning.mode must be one of {F.BIN_MODES}")
        if self.encoding.categorical not in ("ordinal", "mean_target", "drop"):
            raise ConfigError(f"encoding.categorical: unknown choice {self.encoding.categorical!r}")
        if any(not isinstance(v, list) or not v for v in self.grid.values()):
            raise ConfigError("grid values must be non-empty lists")
        if self.cv.k_outer < 2 or self.cv.k_inner < 2:
            raise ConfigError("cv folds must be >= 2")
        if not 0.0 < self.split.test_fraction < 1.0:
            raise ConfigError("split.test_fraction must lie in (0, 1)")
        return self


def _build(cls, d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - set(fields))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kw = {}
    for name, value in d.items():
        f = fields[name]
        sub = f.default_factory if f.default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(sub):
            kw[name] = _build(sub, value, f"{where}.{name}")
        else:
            kw[name] = value
    return cls(**kw)


def load_config(path=None):
    if path is None:
        return PipelineConfig()
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return PipelineConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _dump_json(obj, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, ColumnRole):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def sibling_schema_path(path):
    p = Path(path)
    return p.with_name(p.stem + ".schema.json")


def resolve_schema(cfg, in_path):
    if cfg.schema:
        return load_schema(cfg.schema)
    sib = sibling_schema_path(in_path)
    if sib.is_file():
        return load_schema(sib)
    return default_schema()


def _read(in_path, cfg, allow_empty=False):
    return read_csv(in_path, resolve_schema(cfg, in_path), allow_empty=allow_empty)[0]


# ---------------------------------------------------------------------------
# cleaning
# ---------------------------------------------------------------------------

@dataclass
class CleanReport:
    rows_in: int
    rows_out: int = 0
    nulls_removed: int = 0
    duplicates_removed: int = 0
    outliers_removed: int = 0
    outlier_reports: list = field(default_factory=list)
    dropped_features: dict = field(default_factory=dict)
    retained_features: list = field(default_factory=list)

    def balanced(self):
        return self.rows_in - (self.nulls_removed + self.duplicates_removed
                               + self.outliers_removed) == self.rows_out

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["accounting_ok"] = self.balanced()
        return d


def clean_table(t, cc):
    """Drop nulls, then exact duplicate rows, then target outliers, then weak features.

    Returns ``(cleaned, report)``; ``cleaned`` is ``None`` when no rows survive.
    """
    rep = CleanReport(rows_in=t.n_rows)
    if cc.drop_nulls:
        keep = ~t.row_missing()
        rep.nulls_removed = int((~keep).sum())
        t = t.take(np.nonzero(keep)[0])
    if cc.dedup:
        seen = set()
        keep = []
        for i, k in enumerate(t.row_keys()):
            if k not in seen:
                seen.add(k)
                keep.append(i)
        rep.duplicates_removed = t.n_rows - len(keep)
        t = t.take(np.asarray(keep, np.int64))
    if t.n_rows and cc.outlier_method != "none":
        if t.target_name is None:
            raise SchemaError("outlier removal needs a target column")
        col = t.column(t.target_name)
        ok = np.nonzero(~col.missing)[0]
        y = col.values[ok]
        if cc.outlier_method == "tukey":
            orep = tukey_fences(y, TukeyParams(**cc.tukey))
        elif cc.outlier_method == "zscore":
            orep = zscore_outliers(y, **cc.zscore)
        else:
            orep = cooks_distance(t.take(ok).matrix(t.feature_names), y, cc.cooks_threshold)
        orep.column = t.target_name
        flagged = ok[np.asarray(orep.flagged, np.int64)] if orep.flagged else np.zeros(0, np.int64)
        rep.outlier_reports.append(orep.to_dict())
        rep.outliers_removed = int(flagged.size)
        keep = np.ones(t.n_rows, bool)
        keep[flagged] = False
        t = t.take(np.nonzero(keep)[0])
    rep.rows_out = t.n_rows
    if t.n_rows == 0:
        return None, rep
    if t.target_name is not None and t.n_rows > 1:
        retained, dropped = F.correlation_filter(t, t.target_name, cc.correlation_threshold)
        rep.retained_features = retained
        rep.dropped_features = dropped
        t = t.drop(list(dropped))
    return t, rep


# ---------------------------------------------------------------------------
# encoding and the model file
# ---------------------------------------------------------------------------

def fit_encoders(t, ec):
    maps = []
    for c in ec.date_columns:
        if c in t:
            t, m = F.encode_date(t, c, return_map=True)
            maps.append(m)
    for c in t.names_with_role(ColumnRole.CATEGORICAL_FEATURE):
        if ec.categorical == "ordinal":
            t, m = F.ordinal_encode(t, c)
        elif ec.categorical == "mean_target":
            t, m = F.mean_target_encode(t, c, ec.mean_target_m)
        else:
            t = t.drop([c])
            continue
        maps.append(m)
    return t, maps


def apply_encoders(t, maps):
    for m in maps:
        if m.column in t:
            t = F.apply_encoding(t, m)
    return t


def _strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: _strip_volatile(v) for k, v in obj.items()
                if k not in ("timestamp", "nondeterministic")}
    if isinstance(obj, list):
        return [_strip_volatile(v) for v in obj]
    return obj


@dataclass
class ModelFile:
    model: TrainedModel
    encoders: list
    retained_features: list
    input_schema: dict
    bin_model: object = None
    config: dict = None
    data_fingerprint: str = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        pipe = {"encoders": [m.to_dict() for m in self.encoders],
                "retained_features": list(self.retained_features),
                "input_schema": {k: ColumnRole(v).value for k, v in self.input_schema.items()}}
        if self.bin_model is not None:
            pipe["bin_model"] = self.bin_model.to_dict()
        d = {"format_version": FORMAT_VERSION, "pipeline": pipe, "model": self.model.to_dict(),
             "config": self.config, "data_fingerprint": self.data_fingerprint}
        d.update(self.extra)
        return d

    @classmethod
    def from_dict(cls, d):
        v = d.get("format_version")
        if v != FORMAT_VERSION:
            raise ConfigError(f"model file format_version {v!r} is not supported (expected {FORMAT_VERSION})")
        pipe = d["pipeline"]
        bm = F.BinModel.from_dict(pipe["bin_model"]) if "bin_model" in pipe else None
        extra = {k: v for k, v in d.items()
                 if k not in ("format_version", "pipeline", "model", "config", "data_fingerprint")}
        return cls(TrainedModel.from_dict(d["model"]),
                   [F.EncodingMap.from_dict(m) for m in pipe["encoders"]],
                   list(pipe["retained_features"]),
                   {k: ColumnRole(r) for k, r in pipe["input_schema"].items()},
                   bm, d.get("config"), d.get("data_fingerprint"), extra)

    def fingerprint(self):
        """Digest of the file content minus timestamps and timings."""
        text = json.dumps(_strip_volatile(self.to_dict()), sort_keys=True, default=_json_default)
        return hashlib.sha256(text.encode()).hexdigest()

    def save(self, path):
        _dump_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        try:
            d = json.loads(Path(path).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a model file ({exc})") from None
        return cls.from_dict(d)

    def required_columns(self):
        """Raw input columns needed to rebuild every model input."""
        src = {}
        for m in self.encoders:
            if m.kind == "date_split":
                for o in m.mapping["outputs"]:
                    src[o] = m.column
        names = [f for f in self.model.feature_names if f != F.PREDICTED_BIN]
        if self.bin_model is not None:
            names += self.bin_model.features
        out = []
        for n in names:
            s = src.get(n, n)
            if s not in out:
                out.append(s)
        return out

    def transform(self, t):
        absent = [c for c in self.required_columns() if c not in t]
        if absent:
            raise MissingFeatureError(absent)
        t = apply_encoders(t, self.encoders)
        if self.bin_model is not None:
            t = F.target_binning_transform(self.bin_model, t)
        return t

    def predict(self, t):
        return predict(self.model, self.transform(t))


def train_pipeline(t, cfg):
    """Encode, optionally grid-search and select, optionally bin, then fit."""
    input_schema = t.roles()
    fp = t.fingerprint()
    t, maps = fit_encoders(t, cfg.encoding)
    spec = RegressorSpec.from_dict(cfg.model)
    extra = {}
    if cfg.grid:
        gs = grid_search(t, spec, cfg.grid, k_inner=cfg.cv.k_inner, seed=spec.seed)
        extra["grid_search"] = gs.to_dict()
        if cfg.cv.nested:
            nc = nested_cv(t, spec, cfg.grid, cfg.cv.k_outer, cfg.cv.k_inner, seed=spec.seed)
            extra["nested_cv"] = {"mean_r2": nc.mean_r2, "std_r2": nc.std_r2,
                                  "best_params": nc.best_params}
        spec = spec.with_params(**gs.best)
    feats = list(t.feature_names)
    if cfg.selection.enabled:
        feats = F.importance_select(t, spec, cfg.selection.k_folds, cfg.selection.tolerance,
                                    seed=spec.seed, features=feats)
    bm = None
    fit_on, fit_feats = t, feats
    if cfg.binning.enabled:
        b = cfg.binning
        fit_on, bm = F.target_binning_fit(t, F.BinSpec(b.n_bins, b.strategy), b.predictor, b.mode,
                                          TukeyParams(**b.tukey), features=feats, seed=spec.seed)
        fit_feats = feats + [F.PREDICTED_BIN]
    model = fit_model(spec, fit_on, fit_feats)
    return ModelFile(model, maps, feats, input_schema, bm, cfg.to_dict(), fp, extra)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    try:
        spec = load_synth_spec(args.config)
    except FileNotFoundError:
        raise ConfigError(f"synthetic spec not found: {args.config}") from None
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid synthetic spec: {exc}") from None
    if args.seed is not None:
        spec.seed = int(args.seed)
    n = 5000 if args.rows is None else int(args.rows)
    if n < 1:
        raise ConfigError("--rows must be >= 1")
    table, truth, log = synthesize_dataset(spec, n, return_log=True)
    out = Path(args.out)
    write_csv(table, out)
    with open(out.with_name(out.stem + "_truth.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        ids = table.names_with_role(ColumnRole.IDENTIFIER)
        idcol = table.column(ids[0]) if ids else None
        w.writerow(([idcol.name] if idcol else ["row"]) + ["truth"])
        for i, v in enumerate(truth):
            w.writerow([idcol.cell_text(i) if idcol else i, repr(float(v))])
    _dump_json(log.to_dict(), out.with_name(out.stem + "_corruption.json"))
    return EXIT_OK


def cmd_clean(args):
    cfg = load_config(args.config)
    t = _read(args.inp, cfg)
    cleaned, rep = clean_table(t, cfg.cleaning)
    out = Path(args.out)
    report_path = Path(args.report) if args.report else out.with_name(out.stem + "_clean_report.json")
    _dump_json(rep.to_dict(), report_path)
    if cleaned is None:
        print("error: no rows survive cleaning", file=sys.stderr)
        return EXIT_DATA
    write_csv(cleaned, out)
    write_schema(cleaned, sibling_schema_path(out))
    return EXIT_OK


def cmd_profile(args):
    cfg = load_config(args.config)
    t = _read(args.inp, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    p = profile(t)
    if p.bedrooms is not None:
        write_records_csv([{"rmbed": k, "count": v} for k, v in p.bedrooms.items()],
                          out / "profile_bedrooms.csv", ["rmbed", "count"])
    if p.months is not None:
        write_records_csv([{"month": k, "count": v} for k, v in p.months.items()],
                          out / "profile_months.csv", ["month", "count"])
    write_records_csv([dataclasses.asdict(s) for s in p.summary], out / "profile_describe.csv",
                      ["name", "count", "missing_count", "mean", "std", "min", "max"])
    p.correlation.to_csv(out / "profile_correlation.csv")
    for note in p.notices:
        print(f"notice: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.model = dict(cfg.model, seed=int(args.seed))
    t = _read(args.inp, cfg)
    mf = train_pipeline(t, cfg)
    mf.save(args.model or args.out)
    return EXIT_OK


def _load_model(path):
    try:
        return ModelFile.load(path)
    except FileNotFoundError:
        raise FileNotFoundError(f"no such model file: {path}") from None


def cmd_evaluate(args):
    mf = _load_model(args.model)
    t = read_csv(args.inp, mf.input_schema, require=mf.required_columns())[0]
    if t.target_name is None:
        raise SchemaError("evaluation input has no target column")
    tt = mf.transform(t)
    yhat = predict(mf.model, tt)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(metrics(tt.target(), yhat).to_dict(), out / "metrics.json")
    write_records_csv(residuals_data(mf.model, test=tt), out / "residuals.csv",
                      ["split", "actual", "predicted", "residual"])
    pe = prediction_error_data(mf.model, tt)
    write_records_csv(pe.records, out / "prediction_error.csv", ["actual", "predicted"])
    _dump_json({"slope": pe.slope, "intercept": pe.intercept, "identity": list(pe.identity)},
               out / "prediction_error_fit.json")
    return EXIT_OK


def cmd_predict(args):
    mf = _load_model(args.model)
    t = read_csv(args.inp, mf.input_schema, allow_empty=True, require=mf.required_columns())[0]
    ids = t.names_with_role(ColumnRole.IDENTIFIER)
    yhat = mf.predict(t) if t.n_rows else np.zeros(0)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ids[:1] + ["predicted"])
        idcol = t.column(ids[0]) if ids else None
        for i, v in enumerate(yhat):
            w.writerow(([idcol.cell_text(i)] if idcol else []) + [repr(float(v))])
    return EXIT_OK


def run_compare(t, cfg, seed=None):
    """Split, encode, and run the before/after comparison on a cleaned table.

    Returns ``(report, train, test)`` with the encoded splits.
    """
    s = cfg.split
    seed = s.seed if seed is None else int(seed)
    sp = split_train_test(t, s.test_fraction, seed, s.leakage_guard)
    train, maps = fit_encoders(sp.train, cfg.encoding)
    test = apply_encoders(sp.test, maps)
    roster = ([RegressorSpec.from_dict(r) for r in cfg.compare.roster]
              if cfg.compare.roster is not None else default_roster(seed))
    b = cfg.binning
    snapshot = cfg.to_dict()
    snapshot["split"]["seed"] = seed
    report = compare_models(train, test, roster, F.BinSpec(b.n_bins, b.strategy), b.mode,
                            b.predictor, seed=seed, config=snapshot,
                            bin_tukey=TukeyParams(**b.tukey))
    return report, train, test


def cmd_compare(args):
    cfg = load_config(args.config)
    t = _read(args.inp, cfg)
    report, train, test = run_compare(t, cfg, args.seed)
    seed = cfg.split.seed if args.seed is None else int(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(report.to_dict(), out / "comparison.json")
    (out / "comparison.txt").write_text(report.to_text(), encoding="utf-8")

    rng = np.random.default_rng([seed, 50])
    m = min(int(cfg.compare.sample_rows), test.n_rows)
    rows = np.sort(rng.choice(test.n_rows, m, replace=False))
    ids = test.names_with_role(ColumnRole.IDENTIFIER)
    header = (ids[:1] or ["row"]) + ["actual"]
    cols = []
    for r in report.rows:
        for arm in ("before", "after"):
            if arm in r.predictions:
                header.append(f"{r.algorithm}_{arm}")
                cols.append(r.predictions[arm])
    y = test.target()
    with open(out / "prediction_sample.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        idcol = test.column(ids[0]) if ids else None
        for i in rows:
            w.writerow([idcol.cell_text(i) if idcol else int(i), repr(float(y[i]))]
                       + [repr(float(c[i])) for c in cols])

    ap = alpha_path(train, sorted(cfg.compare.alpha_grid), k=cfg.cv.k_inner, seed=seed)
    write_records_csv(ap.records(), out / "alpha_path.csv", ["alpha", "cv_mse", "nonzero"])
    if cfg.compare.learning_curve:
        spec = RegressorSpec.from_dict(cfg.model)
        lc = learning_curve(train, spec, cfg.compare.learning_fractions, k=cfg.cv.k_inner, seed=seed)
        write_records_csv(lc, out / "learning_curve.csv", ["fraction", "n_rows", "train_r2", "cv_r2"])
    print(report.to_text(), end="")
    return EXIT_OK


COMMANDS = {
    "generate": (cmd_generate, "draw a synthetic dataset"),
    "clean": (cmd_clean, "drop nulls, duplicates, outliers and weak features"),
    "profile": (cmd_profile, "write profiling tables"),
    "train": (cmd_train, "fit the configured pipeline and save a model file"),
    "evaluate": (cmd_evaluate, "score a model file on labelled data"),
    "compare": (cmd_compare, "before/after target-binning model comparison"),
    "predict": (cmd_predict, "predict with a model file"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="binreg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--in", dest="inp", help="input CSV")
        s.add_argument("--out", help="output file or directory")
        s.add_argument("--config", help="JSON config (synthetic spec for generate)")
        s.add_argument("--model", help="model file")
        s.add_argument("--seed", type=int)
        s.add_argument("--rows", type=int)
        s.add_argument("--report", help="clean report path")
    return p


_NEEDS = {"generate": ("out",), "clean": ("inp", "out"), "profile": ("inp", "out"),
          "train": ("inp",), "evaluate": ("model", "inp", "out"),
          "compare": ("inp", "out"), "predict": ("model", "inp", "out")}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    missing = [f"--{'in' if a == 'inp' else a}" for a in _NEEDS[args.command]
               if getattr(args, a) is None]
    if args.command == "train" and args.model is None and args.out is None:
        missing.append("--model")
    if missing:
        print(f"error: {args.command} requires {' '.join(missing)}", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingFeatureError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, SchemaError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
