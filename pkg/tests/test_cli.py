import json

import pytest
from click.testing import CliRunner

from zptower.cli import (ResultRecord, Store, load_spec, main, run_compute,
                         spec_from_dict, verify_suite)
from zptower.gf import field
from zptower.tower import TowerSpec


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def specfile(tmp_path):
    path = tmp_path / "p3d7.json"
    path.write_text(json.dumps({"name": "p3d7", "p": 3,
                                "terms": [{"v": 0, "c": 1, "i": 7}]}))
    return path


def test_load_spec_and_normalization_warning(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"name": "w", "p": 2,
                                "terms": [{"v": 0, "c": 1, "i": 6}]}))
    warnings = []
    spec = load_spec(path, warn=warnings.append)
    assert warnings and spec.terms[0].i == 3


def test_extension_field_spec_roundtrip(tmp_path):
    data = {"name": "g", "p": 2, "k": 2, "modulus": [1, 1],
            "terms": [{"v": 0, "c": [0, 1], "i": 5}]}
    spec = spec_from_dict(data)
    assert spec.field.k == 2 and spec.terms[0].c == spec.field.gen()


def test_info_command(runner, specfile, tmp_path):
    r = runner.invoke(main, ["--data-dir", str(tmp_path / "d"), "info", str(specfile), "-n", "4"])
    assert r.exit_code == 0, r.output
    assert "3829" in r.output and "5700" in r.output
    assert "stable" in r.output


def test_compute_and_store(runner, specfile, tmp_path):
    data = tmp_path / "data"
    r = runner.invoke(main, ["--data-dir", str(data), "compute", str(specfile),
                             "-n", "2", "-r", "2"])
    assert r.exit_code == 0, r.output
    store = Store(data / "results.jsonl")
    recs = store.query()
    assert [rec.level for rec in recs] == [1, 2]
    assert recs[0].a_r == (4, 5) and recs[1].a_r == (25, 36)
    assert recs[0].d == 7 and recs[0].genus == 6
    # duplicate append kept; latest wins on query
    r = runner.invoke(main, ["--data-dir", str(data), "compute", str(specfile),
                             "-n", "2", "-r", "2"])
    assert len(store.load()) == 4 and len(store.query()) == 2
    assert store.query(spec_hash="nope") == []


def test_run_compute_level0():
    spec = TowerSpec.make(field(3), [(0, 1, 7)], name="z")
    recs = run_compute(spec, 0)
    assert len(recs) == 1 and recs[0].level == 0 and recs[0].genus == 0


def test_warm_cache_identical(tmp_path):
    spec = TowerSpec.make(field(3), [(0, 1, 7)], name="z")
    r1 = run_compute(spec, 2, powers=2, data_dir=tmp_path)
    r2 = run_compute(spec, 2, powers=2, data_dir=tmp_path)
    assert [(r.level, r.genus, r.a_r) for r in r1] == [(r.level, r.genus, r.a_r) for r in r2]


def test_fit_command(runner, specfile, tmp_path):
    r = runner.invoke(main, ["--data-dir", str(tmp_path / "d"), "fit", str(specfile),
                             "-n", "4", "-r", "1"])
    assert r.exit_code == 0, r.output
    assert "7/24" in r.output


def test_scan_and_export(runner, tmp_path):
    sd = tmp_path / "specs"
    sd.mkdir()
    for d in (3, 5):
        (sd / f"d{d}.json").write_text(json.dumps(
            {"name": f"d{d}", "p": 2, "terms": [{"v": 0, "c": 1, "i": d}]}))
    data = tmp_path / "data"
    r = runner.invoke(main, ["--data-dir", str(data), "scan", str(sd), "-n", "2"])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["--data-dir", str(data), "export", "--format", "json"])
    assert r.exit_code == 0
    rows = json.loads(r.output)
    assert len(rows) == 4
    out = tmp_path / "x.csv"
    r = runner.invoke(main, ["--data-dir", str(data), "export", "--format", "csv",
                             "--out", str(out)])
    assert r.exit_code == 0 and out.exists()
    header = out.read_text().splitlines()[0]
    assert header.startswith("spec_hash,spec_name,p,k,d,level,genus,a_r")


def test_scan_parallel(runner, tmp_path):
    sd = tmp_path / "specs"
    sd.mkdir()
    for d in (3, 5, 7):
        (sd / f"d{d}.json").write_text(json.dumps(
            {"name": f"d{d}", "p": 2, "terms": [{"v": 0, "c": 1, "i": d}]}))
    data = tmp_path / "data"
    r = runner.invoke(main, ["--data-dir", str(data), "scan", str(sd), "-n", "1",
                             "-j", "2"])
    assert r.exit_code == 0, r.output
    assert len(Store(data / "results.jsonl").query()) == 3


def test_verify_constants_suite(runner, tmp_path):
    r = runner.invoke(main, ["--data-dir", str(tmp_path), "verify", "constants"])
    assert r.exit_code == 0 and "PASS" in r.output


def test_verify_tower_suite(tmp_path):
    res = verify_suite("p3d7", depth=2, data_dir=tmp_path)
    assert res.passed
    res = verify_suite("p5", depth=1, data_dir=tmp_path)
    assert res.passed


def test_verify_unknown_suite():
    import click
    with pytest.raises(click.UsageError):
        verify_suite("nope")


def test_usage_error_exit_code(runner):
    r = runner.invoke(main, ["compute", "/nonexistent.json"])
    assert r.exit_code == 2


def test_record_roundtrip():
    rec = ResultRecord("h", "n", 3, 1, 7, 2, 66, (25, 36), 0.1, "0.1.0", "t")
    assert ResultRecord.deserialize(rec.serialize()) == rec
