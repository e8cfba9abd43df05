import json

import pytest

from examini.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, check_document, dispatch
from examini.cli.services import campaign_from_values, gravity_from_values, mhd_from_values, pic_from_values
from examini.cli.schemas import SCHEMAS
from examini.cli.validation import validate_document
from examini.core.errors import ValidationError
from examini.main import main
from examini.tracing.io import write_trace

from .helpers import make_event, make_timeline

MACHINE = {"cpu_model": "test-cpu", "logical_cpus": 8, "physical_cpus": 4, "workers": 8}


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_defaults_fill_every_field():
    values = validate_document({}, SCHEMAS["mhd"])
    config, grid = mhd_from_values(values)
    assert config.riemann == "HLLD"
    assert config.wavevector == (1, 1, 1)
    assert grid.global_cells == (32, 32, 32)
    assert grid.ghost_width == 3


def test_violations_carry_field_paths():
    data = {"cfl": 1.5, "riemann": "ROE", "species": [], "bogus": 1}
    # unknown fields first, then schema order
    assert check_document("mhd", data) == ["species", "bogus", "riemann", "cfl"]

    pic = {"species": [{"name": "e", "qom": "minus one", "charge_density": -1.0}], "cells": [16]}
    assert set(check_document("pic", pic)) == {"species[0].qom", "cells"}

    assert check_document("gravity", {"sph": {"n_ngb": 4}}) == ["sph.n_ngb"]
    assert check_document("gravity", {"sph": None}) == []


def test_validation_collects_all_violations():
    with pytest.raises(ValidationError) as info:
        validate_document({"n_bodies": 0, "key_order": 40, "walk": "fmm"}, SCHEMAS["gravity"])
    assert set(info.value.fields) == {"n_bodies", "key_order", "walk"}
    with pytest.raises(ValidationError):
        validate_document([1, 2], SCHEMAS["gravity"])


def test_builders_produce_domain_objects():
    pic = pic_from_values(validate_document({"cells": [8, 8], "extent": [0.8, 0.8]}, SCHEMAS["pic"]))
    assert pic.cells == (8, 8)
    assert len(pic.species) == len(SCHEMAS["pic"]["species"].default_value())

    gravity = gravity_from_values(validate_document({"theta": 0.7, "sph": {"n_ngb": 40}}, SCHEMAS["gravity"]))
    assert gravity.params.theta == 0.7
    assert gravity.sph.n_ngb == 40

    spec = campaign_from_values(validate_document({"tolerance_pct": 5.0}, SCHEMAS["campaign"]))
    assert spec.app == "synthetic"
    assert spec.rank_counts == [1, 2, 4, 8]


def test_gravity_run_echoes_effective_config(tmp_path, capsys):
    config = _write(tmp_path / "gravity.json", {"n_bodies": 64, "walk": "bh"})
    out = tmp_path / "out"
    assert dispatch(["gravity", "--config", config, "--out", str(out), "--seed", "5"]) == EXIT_OK

    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "completed"
    assert summary["bodies"] == 64
    assert "result" not in summary

    effective = json.loads((out / "gravity_effective_config.json").read_text(encoding="utf-8"))
    assert effective["seed"] == 5
    assert effective["theta"] == 0.5
    assert effective["sph"] is None
    assert effective["ranks"] is None


def test_effective_config_records_command_line_overrides(tmp_path, capsys):
    config = _write(tmp_path / "pic.json", {"cells": [8, 8], "extent": [0.8, 0.8], "ppc": 4})
    out = tmp_path / "out"
    assert dispatch(["pic", "--config", config, "--out", str(out), "--ranks", "2", "--cycles", "1"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["cycles"] == 1

    effective = json.loads((out / "pic_effective_config.json").read_text(encoding="utf-8"))
    assert effective["ranks"] == 2
    assert effective["cycles"] == 1
    assert validate_document(effective, SCHEMAS["pic"])["ranks"] == 2


def test_invalid_config_is_a_usage_error(tmp_path, capsys):
    config = _write(tmp_path / "mhd.json", {"cfl": 1.5, "riemann": "ROE"})
    assert dispatch(["mhd", "--config", config, "--out", str(tmp_path)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "cfl" in err and "riemann" in err
    assert "mhd config fields" in err
    assert not (tmp_path / "mhd_effective_config.json").exists()


def test_missing_config_file(tmp_path):
    assert dispatch(["pic", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_bad_arguments():
    assert dispatch(["lattice"]) == EXIT_USAGE
    assert dispatch(["trace", "analyze"]) == EXIT_USAGE


def test_runtime_failure_exit_code(tmp_path):
    config = _write(tmp_path / "gravity.json", {"n_bodies": 2})
    assert dispatch(["gravity", "--config", config, "--out", str(tmp_path), "--ranks", "5"]) == EXIT_RUNTIME


def test_trace_commands(tmp_path, capsys):
    timeline = make_timeline([
        make_event(0, "USEFUL", 0, 8, region="solve"), make_event(0, "BARRIER", 8, 10, region="solve"),
        make_event(1, "USEFUL", 0, 6, region="solve"), make_event(1, "BARRIER", 6, 10, region="solve"),
    ], roi=(0, 10))
    trace = write_trace(timeline, tmp_path / "trace.jsonl")
    out = tmp_path / "analysis"

    assert main(["trace", "analyze", "--in", str(trace), "--out", str(out)]) == EXIT_OK
    tree = json.loads(capsys.readouterr().out)
    assert tree["global"]["load_balance"] == pytest.approx(0.875)
    assert (out / "efficiency.csv").exists()

    assert main(["trace", "antipatterns", "--in", str(trace), "--out", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["status"] == "clean"
    assert (out / "antipatterns.json").exists()


def test_campaign_regression_exit_code(tmp_path, capsys):
    config = _write(tmp_path / "campaign.json", {"app": "synthetic", "rank_counts": [1, 2], "resolution": [2],
                                                 "repetitions": 1, "steps": 1, "options": {"sweeps": 1}})
    machine = _write(tmp_path / "machine.json", MACHINE)
    baselines = tmp_path / "baselines"
    args = ["campaign", "--config", config, "--machine", machine, "--baseline-dir", str(baselines),
            "--out", str(tmp_path / "out")]

    assert dispatch(args + ["--update-baselines"]) == EXIT_OK
    first = json.loads(capsys.readouterr().out)
    assert len(first["missing_baselines"]) == 2

    stored = sorted(baselines.glob("*.json"))
    assert len(stored) == 2
    for path in stored:
        data = json.loads(path.read_text(encoding="utf-8"))
        data["walltime"] = "1/1000000"
        path.write_text(json.dumps(data), encoding="utf-8")

    assert dispatch(args + ["--format", "csv"]) == EXIT_CHECK_FAILED
    second = json.loads(capsys.readouterr().out)
    assert second["status"] == "failed"
    assert len(second["regressions"]) == 2
    assert set(second["paths"]) == {"csv"}


def test_report_reemits_saved_result(tmp_path, capsys):
    config = _write(tmp_path / "campaign.json", {"rank_counts": [1], "resolution": [1], "repetitions": 1,
                                                 "steps": 1, "options": {"sweeps": 1}})
    machine = _write(tmp_path / "machine.json", MACHINE)
    out = tmp_path / "out"
    assert dispatch(["campaign", "--config", config, "--machine", machine, "--out", str(out),
                     "--baseline-dir", str(tmp_path / "baselines"), "--format", "json"]) == EXIT_OK
    capsys.readouterr()

    again = tmp_path / "again"
    assert dispatch(["report", "--in", str(out / "campaign.json"), "--out", str(again)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["configurations"] == 1
    assert (again / "campaign.csv").exists()
