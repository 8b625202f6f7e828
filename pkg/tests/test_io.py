import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

import crscat
from crscat.io import (InputDataError, RunManifest, format_value, manifest_path, parse_value,
                       read_csv, read_kv, read_manifest, write_csv, write_kv, write_manifest)


def test_kv_round_trip(tmp_path):
    data = {"N": 1000000, "T_r_K": 2.9e-05, "times_s": [0.0, 0.5, 1.0], "flag": True, "model": "ert"}
    path = tmp_path / "x.kv"
    write_kv(path, data, header="test file\nsecond line")
    raw = read_kv(path)
    assert list(raw) == list(data)
    assert parse_value(raw["N"]) == 1000000
    assert parse_value(raw["T_r_K"]) == 2.9e-05
    assert parse_value(raw["flag"]) is True
    assert parse_value(raw["model"]) == "ert"
    assert [float(x) for x in raw["times_s"].split(",")] == [0.0, 0.5, 1.0]
    assert path.read_text().startswith("# test file\n# second line\n")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_tokens_round_trip(x):
    assert float(format_value(x)) == x


def test_parse_value_types():
    assert parse_value(" 12 ") == 12
    assert parse_value("1e3") == 1000.0
    assert parse_value("False") is False
    assert parse_value("none") is None
    assert parse_value("170a0") == "170a0"


@pytest.mark.parametrize("text", ["no equals sign\n", " = 3\n", "a = 1\na = 2\n"])
def test_kv_errors(tmp_path, text):
    path = tmp_path / "bad.kv"
    path.write_text(text)
    with pytest.raises(InputDataError):
        read_kv(path)


def test_kv_comments_and_missing_file(tmp_path):
    path = tmp_path / "c.kv"
    path.write_text("# only comment\n\nkey = value  # trailing\n")
    assert read_kv(path) == {"key": "value"}
    with pytest.raises(FileNotFoundError):
        read_kv(tmp_path / "absent.kv")


def test_csv_round_trip_is_exact(tmp_path, rng):
    x = rng.normal(size=(25, 3)) * 10.0 ** rng.integers(-30, 30, size=(25, 3))
    path = tmp_path / "d.csv"
    write_csv(path, ["a", "b", "c"], x.tolist(), manifest={"command": "test"})
    cols, man = read_csv(path, required=("a", "c"))
    assert np.array_equal(np.column_stack([cols["a"], cols["b"], cols["c"]]), x)
    assert man == {"command": "test"}


def test_csv_errors(tmp_path):
    path = tmp_path / "d.csv"
    with pytest.raises(ValueError):
        write_csv(path, ["a", "b"], [[1.0]])
    path.write_text("")
    with pytest.raises(InputDataError):
        read_csv(path)
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InputDataError):
        read_csv(path, required=("c",))
    path.write_text("a,b\n1,x\n")
    with pytest.raises(InputDataError):
        read_csv(path)
    path.write_text("a,b\n1,2,3\n")
    with pytest.raises(InputDataError):
        read_csv(path)
    with pytest.raises(FileNotFoundError):
        read_csv(tmp_path / "absent.csv")


def test_manifest_sidecar(tmp_path):
    path = tmp_path / "series.csv"
    m = RunManifest("simulate", ["a.scenario"], {"n_test": np.int64(5), "T": np.float64(1e-5),
                                                  "arr": np.arange(3)}, seed=7)
    assert m.tool_version == crscat.__version__
    out = write_manifest(path, m)
    assert out == manifest_path(path) == tmp_path / "series.csv.manifest.json"
    back = read_manifest(path)
    assert back["seed"] == 7 and back["parameters"] == {"n_test": 5, "T": 1e-5, "arr": [0, 1, 2]}
    assert json.loads(out.read_text()) == back
    assert read_manifest(tmp_path / "other.csv") == {}
