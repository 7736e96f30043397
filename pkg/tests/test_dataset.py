import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binreg.dataset import (ColumnRole, SchemaError, Table, default_schema, load_synth_spec,
                            make_column, read_csv, split_train_test, synthesize_dataset,
                            to_csv_text, write_csv)


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_missing_tokens_become_markers(tmp_path):
    p = _write(tmp_path, "a,b,price\n1,x,10\nNA,,20\n?,null,30\n")
    t, rep = read_csv(p, {"a": "numeric_feature", "b": "categorical_feature", "price": "target"})
    assert list(t.column("a").missing) == [False, True, True]
    assert list(t.column("b").missing) == [False, True, True]
    assert rep.missing_count == {"a": 2, "b": 2, "price": 0}
    with pytest.raises(ValueError, match="row 1"):
        t.numeric("a")


def test_unparseable_numeric_is_missing(tmp_path):
    p = _write(tmp_path, "a,price\nabc,1\n2,2\n")
    t, rep = read_csv(p, {"a": "numeric_feature", "price": "target"})
    assert rep.unparseable == {"a": 1}
    assert t.column("a").missing[0]


def test_header_and_shape_errors(tmp_path):
    with pytest.raises(SchemaError, match="price"):
        read_csv(_write(tmp_path, "a\n1\n"), {"a": "numeric_feature", "price": "target"})
    with pytest.raises(SchemaError, match="zero data rows"):
        read_csv(_write(tmp_path, "a\n"), {"a": "numeric_feature"})
    t, _ = read_csv(_write(tmp_path, "a\n"), {"a": "numeric_feature"}, allow_empty=True)
    assert t.n_rows == 0
    with pytest.raises(SchemaError, match="line 3"):
        read_csv(_write(tmp_path, "a,b\n1,2\n3\n"))
    with pytest.raises(FileNotFoundError):
        read_csv(tmp_path / "nope.csv")


def test_extra_columns_inferred(tmp_path):
    t, rep = read_csv(_write(tmp_path, "a,z,w\n1,2,x\n"), {"a": "numeric_feature"})
    assert rep.extra_columns == ["z", "w"]
    assert t.column("z").role is ColumnRole.NUMERIC_FEATURE
    assert t.column("w").role is ColumnRole.CATEGORICAL_FEATURE


def test_csv_round_trip_exact(tmp_path, rng):
    vals = rng.standard_normal(20) * 1e5
    cols = [make_column("id", "identifier", np.arange(20).astype(str)),
            make_column("x", "numeric_feature", vals),
            make_column("k", "numeric_feature", np.arange(20.0), integer=True),
            make_column("price", "target", vals ** 2)]
    t = Table(cols)
    write_csv(t, tmp_path / "o.csv")
    back, _ = read_csv(tmp_path / "o.csv", t.roles())
    assert np.array_equal(back.numeric("x"), vals)
    assert to_csv_text(back) == to_csv_text(t)
    assert back.fingerprint() == t.fingerprint()


def test_table_invariants():
    a = make_column("a", "numeric_feature", [1.0, 2.0])
    with pytest.raises(SchemaError):
        Table([a, a])
    with pytest.raises(SchemaError):
        Table([a, make_column("b", "numeric_feature", [1.0])])
    with pytest.raises(SchemaError):
        Table([make_column("p", "target", [1.0]), make_column("q", "target", [1.0])])
    t = Table([a])
    with pytest.raises(ValueError):
        t.column("a").values[0] = 5.0


def test_roles_drive_feature_names():
    t = Table([make_column("id", "identifier", ["1", "2"]),
               make_column("f", "numeric_feature", [1.0, 2.0]),
               make_column("base", "appraisal_baseline", [1.0, 2.0]),
               make_column("price", "target", [1.0, 2.0])])
    assert t.feature_names == ["f"]
    assert t.target_name == "price"


def test_default_schema_has_table_columns():
    s = default_schema()
    assert s["price"] is ColumnRole.TARGET and s["aprtot"] is ColumnRole.APPRAISAL_BASELINE
    assert len(s) == 19


def test_split_sizes_and_determinism(rng):
    t = Table([make_column("x", "numeric_feature", rng.standard_normal(100)),
               make_column("price", "target", rng.standard_normal(100))])
    a = split_train_test(t, 0.2, seed=4)
    b = split_train_test(t, 0.2, seed=4)
    assert a.test.n_rows == 20 and a.train.n_rows == 80
    assert np.array_equal(a.test_index, b.test_index)
    assert not set(a.train_index) & set(a.test_index)


def test_leakage_guard_drops_straddling_duplicates():
    x = np.array([1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
    t = Table([make_column("x", "numeric_feature", x), make_column("price", "target", x)])
    for seed in range(30):
        s = split_train_test(t, 0.5, seed=seed)
        if 0 in s.test_index or 1 in s.test_index:
            pass
        train_x = set(s.train.numeric("x"))
        assert not train_x & set(s.test.numeric("x"))


def test_split_errors():
    t = Table([make_column("price", "target", [1.0, 2.0])])
    with pytest.raises(ValueError):
        split_train_test(t, 0.0)
    with pytest.raises(ValueError):
        split_train_test(t.take([0]), 0.5)


def test_synthetic_marginals_and_log():
    spec = load_synth_spec()
    t, truth, log = synthesize_dataset(spec, 5000, return_log=True)
    assert t.n_rows == 5000 and len(truth) == 5000
    assert set(default_schema()) == set(t.names)
    price = t.numeric("price")
    assert 150_000 < price.mean() < 250_000
    assert len(log.duplicates) == 50 and len(log.nulls) == 50 and len(log.outliers) == 50
    rows = [r for r, _ in log.duplicates] + [r for r, _ in log.nulls] + log.outliers
    assert len(rows) == len(set(rows))
    for r, c in log.nulls:
        assert t.column(c).missing[r]
    keys = t.row_keys()
    for r, src in log.duplicates:
        assert keys[r] == keys[src]
    assert json.loads(json.dumps(log.to_dict()))["n_rows"] == 5000


def test_synthetic_is_seeded():
    spec = load_synth_spec()
    a, _ = synthesize_dataset(spec, 300)
    b, _ = synthesize_dataset(spec, 300)
    assert a.fingerprint() == b.fingerprint()
    spec.seed += 1
    c, _ = synthesize_dataset(spec, 300)
    assert c.fingerprint() != a.fingerprint()


def test_synth_spec_validation():
    d = load_synth_spec().to_dict()
    with pytest.raises(ValueError):
        load_synth_spec.__globals__["SynthSpec"].from_dict(dict(d, bogus=1))
    with pytest.raises(ValueError):
        synthesize_dataset(load_synth_spec(), 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_float_cells_round_trip(tmp_path_factory, values):
    t = Table([make_column("price", "target", np.array(values))])
    p = tmp_path_factory.mktemp("rt") / "f.csv"
    write_csv(t, p)
    back, _ = read_csv(p, {"price": "target"})
    assert np.array_equal(back.numeric("price"), np.array(values))
