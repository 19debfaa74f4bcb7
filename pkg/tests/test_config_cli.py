from __future__ import annotations

import copy
import csv
import json
from pathlib import Path

import pytest

from fujitalab.cli import main
from fujitalab.config import load_scenario, scenario_from_dict, validate
from fujitalab.errors import SchemaError
from fujitalab.scenario import HypothesisError, evaluate, run_scenario, sweep

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _load(name: str) -> dict:
    return json.loads((SCENARIOS / name).read_text())


@pytest.fixture
def blowup_cfg() -> dict:
    return _load("thm_3_2_hyperbolic_blowup.json")


def _write(tmp_path, cfg, name="cfg.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ---------------------------------------------------------------------------
# schema


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_bundled_scenarios_validate(name):
    sc = load_scenario(SCENARIOS / name)
    assert sc.name and sc.p > 1


def test_missing_p(blowup_cfg):
    del blowup_cfg["p"]
    with pytest.raises(SchemaError, match="'p' is a required property"):
        validate(blowup_cfg)


def test_unknown_key_is_named(blowup_cfg):
    blowup_cfg["solver"]["n_gird"] = 10
    with pytest.raises(SchemaError, match="n_gird"):
        validate(blowup_cfg)


def test_wrong_schema_version(blowup_cfg):
    blowup_cfg["schema_version"] = 2
    with pytest.raises(SchemaError):
        validate(blowup_cfg)


def test_empty_sweep_axis():
    cfg = _load("sweep_euclidean_fujita.json")
    cfg["sweep"]["p"] = []
    with pytest.raises(SchemaError, match="sweep/p"):
        validate(cfg)


def test_bad_datum_kind(blowup_cfg):
    blowup_cfg["initial_datum"] = {"kind": "delta", "amplitude": 1.0}
    with pytest.raises(SchemaError):
        validate(blowup_cfg)


def test_sampled_drift_needs_table(blowup_cfg):
    blowup_cfg["drift"] = {"kind": "sampled"}
    with pytest.raises(SchemaError, match="sampled"):
        validate(blowup_cfg)


def test_snapshot_every(blowup_cfg):
    sc = scenario_from_dict(blowup_cfg)
    times = sc.solver.snapshot_times
    assert len(times) == 501 and times[0] == 0.0 and times[-1] == pytest.approx(1.0)


def test_with_cell(blowup_cfg):
    sc = scenario_from_dict(blowup_cfg).with_cell(3.0, 0.25)
    assert sc.p == 3.0
    assert sc.raw["initial_datum"] == {"kind": "constant_on_ball", "radius": 6.0, "amplitude": 0.25}


# ---------------------------------------------------------------------------
# scenario evaluation


def test_blowup_scenario_report(tmp_path, blowup_cfg):
    report = json.loads(Path(run_scenario(blowup_cfg, str(tmp_path))).read_text())
    kaplan = report["verdicts"]["kaplan"]
    outcome = report["verdicts"]["outcome"]
    assert kaplan["predicts_blowup"]
    assert outcome["kind"] == "blowup"
    assert outcome["t_est"] <= 1.2 * kaplan["ode_blowup_time"]
    assert all("operation" in c and "tolerance" in c for c in report["claims"])
    for f in report["files"]:
        assert (tmp_path / f).exists()


def test_global_scenario_report(tmp_path):
    report = json.loads(Path(run_scenario(str(SCENARIOS / "thm_4_2_hyperbolic_global.json"), str(tmp_path)))
                        .read_text())
    outcome = report["verdicts"]["outcome"]
    assert outcome["kind"] == "global_up_to" and outcome["t_end"] == 10.0
    assert outcome["envelope_margin"] > 0


def test_hypothesis_failure_is_named(blowup_cfg):
    blowup_cfg["initial_datum"]["mass_factor"] = 0.5
    with pytest.raises(HypothesisError, match="mass > lambda"):
        evaluate(scenario_from_dict(blowup_cfg))


def test_small_a_scenario():
    ev = evaluate(load_scenario(SCENARIOS / "cor_5_3_euclidean_small_a.json"))
    assert ev.small_a is not None and ev.small_a.certified


def test_sweep_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("FUJITALAB_WORKERS", "1")
    cfg = _load("sweep_euclidean_fujita.json")
    cfg["sweep"] = {"p": [1.5, 2.0], "amplitude": [1e-3]}
    report = json.loads(Path(sweep(cfg, str(tmp_path))).read_text())
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["p", "amplitude", "outcome", "t_blowup", "margin"]
    assert [r["outcome"] for r in rows] == ["blowup_certified", "global_up_to"]
    assert report["workers"] == 1
    svg = (tmp_path / "sweep.svg").read_text()
    assert "nonexistence upper" in svg and svg.startswith("<svg")


def test_sweep_cell_errors_do_not_abort(tmp_path, monkeypatch):
    monkeypatch.setenv("FUJITALAB_WORKERS", "1")
    cfg = _load("sweep_euclidean_fujita.json")
    # gaussian_super cannot be built for p below the existence exponent
    cfg["barriers"] = {"gaussian_super": {"eps": 0.2}}
    cfg["sweep"] = {"p": [1.5], "amplitude": [1e-3], "small_a": False}
    sweep(cfg, str(tmp_path))
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["outcome"] in {"global_up_to", "inconclusive", "blowup"}


# ---------------------------------------------------------------------------
# command line


def test_cli_simulate(tmp_path, capsys, blowup_cfg):
    out = tmp_path / "out"
    assert main(["--out", str(out), "simulate", _write(tmp_path, blowup_cfg)]) == 0
    assert capsys.readouterr().out.strip() == str(out / "report.json")


def test_cli_threshold(tmp_path, capsys, blowup_cfg):
    assert main(["--out", str(tmp_path), "threshold", _write(tmp_path, blowup_cfg)]) == 0
    data = json.loads((tmp_path / "threshold.json").read_text())
    assert set(data) == {"mass", "threshold", "predicts_blowup", "ode_blowup_time", "parameters"}
    assert data["predicts_blowup"] and data["mass"] == pytest.approx(3 * data["threshold"], rel=1e-9)


def test_cli_barrier_check(tmp_path, blowup_cfg):
    assert main(["--out", str(tmp_path), "barrier-check", _write(tmp_path, blowup_cfg)]) == 0
    certs = json.loads((tmp_path / "certificates.json").read_text())["certificates"]
    assert certs["phi"]["passed"]


def test_cli_barrier_check_failure(tmp_path, blowup_cfg):
    blowup_cfg["barriers"] = {"w": {"lambda": 0.75, "a": 0.1}}
    assert main(["--out", str(tmp_path), "barrier-check", _write(tmp_path, blowup_cfg)]) == 2


@pytest.mark.parametrize("edit", ["drop_p", "unknown_key", "bad_json"])
def test_cli_schema_errors(tmp_path, blowup_cfg, edit):
    if edit == "drop_p":
        del blowup_cfg["p"]
        path = _write(tmp_path, blowup_cfg)
    elif edit == "unknown_key":
        blowup_cfg["colour"] = "red"
        path = _write(tmp_path, blowup_cfg)
    else:
        path = str(tmp_path / "broken.json")
        Path(path).write_text("{not json")
    assert main(["--out", str(tmp_path), "simulate", path]) == 2


def test_cli_hypothesis_failure(tmp_path, caplog, blowup_cfg):
    cfg = copy.deepcopy(blowup_cfg)
    cfg["initial_datum"]["mass_factor"] = 0.5
    assert main(["--out", str(tmp_path), "simulate", _write(tmp_path, cfg)]) == 2
    assert "mass > lambda" in caplog.text


def test_cli_missing_file(tmp_path):
    assert main(["--out", str(tmp_path), "simulate", str(tmp_path / "nope.json")]) == 2


def test_cli_verify(capsys):
    assert main(["verify", "geometry"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines[:-1])
    assert lines[-1].startswith("8/8 checks passed")


def test_cli_verify_unknown_suite():
    assert main(["verify", "bogus"]) == 2


def test_cli_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
