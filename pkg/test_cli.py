"""
Tests for the command-line front end.
"""
import json

import pytest
from sqlmodel import Session, select

import cli
from app.models import CheckLog, RunLog
from app.services import database
from app.services.reporting import read_report


def write_config(tmp_path, **overrides):
    config = {
        "dimension": 3,
        "polyhedron": {"preset": "cube"},
        "initial_data": {"preset": "flat", "params": {}, "margin_cells": 2},
        "resolutions": [4, 8],
        "suites": ["faces"],
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


@pytest.fixture
def tmp_engine(tmp_path, monkeypatch):
    engine = database.make_engine(f"sqlite:///{tmp_path / 'runs.db'}")
    monkeypatch.setattr(database, "engine", engine)
    monkeypatch.setattr(cli, "engine", engine)
    return engine


def test_run_passes(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", str(write_config(tmp_path)), "--out", str(out)])
    assert code == cli.EXIT_OK
    printed = capsys.readouterr().out
    assert "[OK] faces/tilt-dec" in printed
    assert "[FAILED]" not in printed
    report = read_report(out / "report.txt")
    assert report.passed
    assert (out / "checks.csv").exists()
    assert (out / "convergence.csv").exists()


def test_run_fails_and_still_writes_report(tmp_path, capsys):
    """Test: a violated check exits with 1 and the report is written"""
    path = write_config(tmp_path, initial_data={"preset": "flat", "params": {"q_scale": -0.5}}, n0=[1, 0, 0])
    out = tmp_path / "out"
    code = cli.main(["run", str(path), "--out", str(out)])
    assert code == cli.EXIT_FAILED
    assert "[FAILED] faces/tilt-dec" in capsys.readouterr().out
    assert not read_report(out / "report.txt").passed


def test_command_line_overrides(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", str(write_config(tmp_path)), "--suite", "smoothing", "--seed", "11",
                     "--resolution", "4", "--out", str(out)])
    assert code == cli.EXIT_OK
    report = read_report(out / "report.txt")
    assert report.seed == 11
    assert report.config["resolutions"] == [4]
    assert {c.suite for c in report.checks} == {"smoothing"}


@pytest.mark.parametrize(
    "overrides, key",
    [
        ({"polyhedron": {"preset": "cube", "edge": 2}}, "polyhedron.edge"),
        ({"n0": [1, 1, 0]}, "n0"),
        ({"resolutions": [8, 4]}, "resolutions"),
        ({"suites": ["faces", "bogus"]}, "suites"),
        ({"dimension": 1}, "dimension"),
    ],
)
def test_invalid_config_names_key(tmp_path, capsys, overrides, key):
    """Test: invalid configurations exit with 2 and name the offending key"""
    code = cli.main(["run", str(write_config(tmp_path, **overrides))])
    assert code == cli.EXIT_CONFIG
    assert key in capsys.readouterr().out


def test_unreadable_config(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    assert "not valid JSON" in capsys.readouterr().out


def test_polyhedron_mismatch_is_config_error(tmp_path):
    path = write_config(tmp_path, polyhedron={"preset": "box", "lo": [0, 0], "hi": [1, 1]})
    assert cli.main(["run", str(path)]) == cli.EXIT_CONFIG


def test_load_config_applies_overrides(tmp_path):
    config = cli.load_config(write_config(tmp_path), {"seed": 3, "suites": None})
    assert config.seed == 3
    assert config.suites == ["faces"]


def test_record_stores_run(tmp_path, tmp_engine, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", str(write_config(tmp_path)), "--out", str(out), "--record"])
    assert code == cli.EXIT_OK
    assert "Recorded as run 1" in capsys.readouterr().out
    with Session(tmp_engine) as session:
        run = session.exec(select(RunLog)).one()
        assert run.passed
        assert run.suites == ["faces"]
        assert run.report_path == str(out / "report.txt")
        checks = session.exec(select(CheckLog).where(CheckLog.run_id == run.id)).all()
        assert len(checks) > 0


def test_explain(capsys):
    assert cli.main(["explain", "tilt-dec"]) == cli.EXIT_OK
    assert capsys.readouterr().out.strip()
    assert cli.main(["explain", "no-such-check"]) == cli.EXIT_CONFIG
