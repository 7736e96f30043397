import csv
import json

import numpy as np
import pytest

from binreg.cli import (EXIT_CONFIG, EXIT_DATA, EXIT_OK, CleaningConfig, ConfigError, ModelFile,
                        PipelineConfig, clean_table, load_config, main)
from binreg.dataset import Table, make_column, read_csv

SMALL = {
    "model": {"algorithm": "cart", "hyperparameters": {"max_depth": 5}, "seed": 0},
    "binning": {"n_bins": 20, "predictor": {"algorithm": "ols"}},
}

# frozen digest of the model file trained by the module fixture
GOLDEN_FP = "b887370c3bdabfaf040c75b399fb9415a86d013928300c669e8723d0b13cb763"


def _cfg(tmp_path, d, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["generate", "--rows", "600", "--out", str(d / "raw.csv")]) == EXIT_OK
    assert main(["clean", "--in", str(d / "raw.csv"), "--out", str(d / "clean.csv")]) == EXIT_OK
    cfg = _cfg(d, SMALL)
    assert main(["train", "--in", str(d / "clean.csv"), "--config", cfg,
                 "--model", str(d / "m.json")]) == EXIT_OK
    return d


def test_generate_side_files(data):
    assert (data / "raw_truth.csv").is_file()
    log = json.loads((data / "raw_corruption.json").read_text())
    assert log["n_rows"] == 600
    assert len(_rows(data / "raw.csv")) == 601


def test_clean_accounting_and_schema(data):
    rep = json.loads((data / "clean_clean_report.json").read_text())
    assert rep["accounting_ok"]
    assert rep["rows_in"] - rep["nulls_removed"] - rep["duplicates_removed"] \
        - rep["outliers_removed"] == rep["rows_out"]
    assert (data / "clean.schema.json").is_file()
    assert len(_rows(data / "clean.csv")) == rep["rows_out"] + 1


def test_three_copies_count_two_duplicates():
    t = Table([make_column("x", "numeric_feature", [1.0, 1.0, 1.0, 2.0, 3.0]),
               make_column("price", "target", [5.0, 5.0, 5.0, 6.0, 7.0])])
    cleaned, rep = clean_table(t, CleaningConfig(outlier_method="none", correlation_threshold=0.0))
    assert rep.duplicates_removed == 2 and cleaned.n_rows == 3 and rep.balanced()


def test_clean_with_no_survivors_exits_data(tmp_path):
    p = tmp_path / "n.csv"
    p.write_text("x,price\n,1\n2,\n")
    cfg = _cfg(tmp_path, {"schema": None})
    sch = tmp_path / "n.schema.json"
    sch.write_text(json.dumps({"x": "numeric_feature", "price": "target"}))
    assert main(["clean", "--in", str(p), "--out", str(tmp_path / "o.csv"), "--config", cfg]) == EXIT_DATA
    assert json.loads((tmp_path / "o_clean_report.json").read_text())["rows_out"] == 0


def test_profile_outputs(data, tmp_path):
    assert main(["profile", "--in", str(data / "clean.csv"), "--out", str(tmp_path)]) == EXIT_OK
    for f in ("profile_bedrooms.csv", "profile_months.csv", "profile_describe.csv",
              "profile_correlation.csv"):
        assert (tmp_path / f).is_file()
    months = _rows(tmp_path / "profile_months.csv")
    assert len(months) == 13


def test_evaluate_file_set(data, tmp_path):
    assert main(["evaluate", "--model", str(data / "m.json"), "--in", str(data / "clean.csv"),
                 "--out", str(tmp_path)]) == EXIT_OK
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "metrics.json", "prediction_error.csv", "prediction_error_fit.json", "residuals.csv"]
    m = json.loads((tmp_path / "metrics.json").read_text())
    assert m["r2"] > 0.5


def test_predict_column_order_irrelevant(data, tmp_path):
    rows = _rows(data / "clean.csv")
    head, body = rows[0], rows[1:]
    perm = list(reversed(range(len(head))))
    shuffled = tmp_path / "shuffled.csv"
    with open(shuffled, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            w.writerow([r[i] for i in perm])
    for name, src in (("a.csv", data / "clean.csv"), ("b.csv", shuffled)):
        assert main(["predict", "--model", str(data / "m.json"), "--in", str(src),
                     "--out", str(tmp_path / name)]) == EXIT_OK
    a, b = _rows(tmp_path / "a.csv"), _rows(tmp_path / "b.csv")
    assert a == b and a[0] == ["parid", "predicted"] and len(a) == len(body) + 1


def test_predict_zero_rows_writes_header(data, tmp_path):
    head = _rows(data / "clean.csv")[0]
    p = tmp_path / "empty.csv"
    p.write_text(",".join(head) + "\n")
    assert main(["predict", "--model", str(data / "m.json"), "--in", str(p),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_OK
    assert _rows(tmp_path / "o.csv") == [["parid", "predicted"]]


def test_predict_missing_feature_exits_data(data, tmp_path):
    rows = _rows(data / "clean.csv")
    j = rows[0].index("sfla")
    p = tmp_path / "cut.csv"
    with open(p, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows([r[:j] + r[j + 1:] for r in rows])
    assert main(["predict", "--model", str(data / "m.json"), "--in", str(p),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_DATA


def test_model_file_round_trip_and_binning_flag(data, tmp_path):
    mf = ModelFile.load(data / "m.json")
    assert "bin_model" in json.loads((data / "m.json").read_text())["pipeline"]
    mf.save(tmp_path / "again.json")
    assert ModelFile.load(tmp_path / "again.json").fingerprint() == mf.fingerprint()
    cfg = _cfg(tmp_path, dict(SMALL, binning={"enabled": False}))
    assert main(["train", "--in", str(data / "clean.csv"), "--config", cfg,
                 "--model", str(tmp_path / "nb.json")]) == EXIT_OK
    assert "bin_model" not in json.loads((tmp_path / "nb.json").read_text())["pipeline"]


def test_model_file_version_check(data, tmp_path):
    d = json.loads((data / "m.json").read_text())
    d["format_version"] = 99
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert main(["predict", "--model", str(p), "--in", str(data / "clean.csv"),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG


def test_model_file_golden_fingerprint(data):
    fp = ModelFile.load(data / "m.json").fingerprint()
    assert fp == GOLDEN_FP


def test_config_rejects_unknown_and_bad_values(tmp_path):
    assert isinstance(load_config(None), PipelineConfig)
    with pytest.raises(ConfigError, match="unknown keys"):
        PipelineConfig.from_dict({"cleaning": {"bogus": 1}})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"binning": {"mode": "sideways"}})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"model": {"algorithm": "nope"}})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


@pytest.mark.parametrize("argv", [
    [],
    ["nosuch"],
    ["clean", "--in", "x.csv"],
    ["train", "--in", "x.csv"],
])
def test_usage_errors_exit_config(argv):
    assert main(argv) == EXIT_CONFIG


def test_bad_config_file_exits_config(data, tmp_path):
    cfg = _cfg(tmp_path, {"split": {"test_fraction": 2}})
    assert main(["compare", "--in", str(data / "clean.csv"), "--out", str(tmp_path),
                 "--config", cfg]) == EXIT_CONFIG
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert main(["clean", "--in", str(data / "clean.csv"), "--out", str(tmp_path / "o.csv"),
                 "--config", str(p)]) == EXIT_CONFIG


def test_missing_input_exits_data(tmp_path):
    assert main(["clean", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv")]) == EXIT_DATA


def test_compare_small_roster(data, tmp_path):
    cfg = _cfg(tmp_path, dict(SMALL, compare={"roster": [{"algorithm": "ols"}], "sample_rows": 10,
                                              "alpha_grid": [10.0, 1.0]}))
    assert main(["compare", "--in", str(data / "clean.csv"), "--out", str(tmp_path),
                 "--config", cfg]) == EXIT_OK
    rep = json.loads((tmp_path / "comparison.json").read_text())
    assert [r["algorithm"] for r in rep["rows"]] == ["baseline_column", "ols"]
    sample = _rows(tmp_path / "prediction_sample.csv")
    assert sample[0] == ["parid", "actual", "baseline_column_before", "ols_before", "ols_after"]
    assert len(sample) == 11
    assert [r[0] for r in _rows(tmp_path / "alpha_path.csv")[1:]] == ["1.0", "10.0"]
