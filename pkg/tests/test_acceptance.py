"""Acceptance criteria AC-1 to AC-8, each reported as one PASS/FAIL line."""

from __future__ import annotations

import filecmp
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fujitalab.criteria import exponent_ranges, ode_blowup_time, ode_blowup_time_numeric
from fujitalab.geometry import gamma_exponent
from fujitalab.scenario import run_scenario, sweep
from fujitalab.verification import (blowup_run, default_barriers, global_run, growth_exponent_fit,
                                    manufactured_error, random_ode_triples)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _report(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_ac1_growth_exponent():
    t0 = time.perf_counter()
    rows = []
    for beta in (0.5, 2.0, 6.0):
        target = 2 * gamma_exponent(beta)
        slope = growth_exponent_fit(beta)
        rows.append((beta, slope, target, abs(slope / target - 1)))
    wall = time.perf_counter() - t0
    ok = all(err <= 0.02 for *_, err in rows) and wall < 5.0
    detail = "; ".join(f"beta={b:g} fit={s:.5f} target={t:.5f}" for b, s, t, _ in rows)
    _report("AC-1", ok, f"{detail}; {wall:.2f} s")


def test_ac2_barrier_certificates():
    t0 = time.perf_counter()
    built = default_barriers()
    wall = time.perf_counter() - t0
    ok = wall < 5.0
    parts = []
    for name, b in built.items():
        cert = b.certificate
        good = cert.passed and cert.min_relative_defect >= -1e-12 and cert.grid_points >= 4096
        ok &= good
        parts.append(f"{name}:{cert.min_relative_defect:+.2e}")
    _report("AC-2", ok, f"min relative defects {' '.join(parts)}; {wall:.2f} s")


def test_ac3_blowup():
    t0 = time.perf_counter()
    sol, outcome, T, residuals = blowup_run()
    wall = time.perf_counter() - t0
    ratio = (outcome.t_est if outcome.kind == "blowup" else math.inf) / T
    ok = (outcome.kind == "blowup" and 0.5 <= ratio <= 1.2 and residuals.size > 0
          and bool(np.all(residuals >= 0)) and wall < 60.0)
    _report("AC-3", ok, f"t_est/T* = {ratio:.4f}; mass inequality at {residuals.size} snapshots, "
                        f"min slack {float(residuals.min()):.3e}; clips {sol.clip_count}; {wall:.2f} s")


def test_ac4_global():
    t0 = time.perf_counter()
    sol, outcome, env = global_run()
    wall = time.perf_counter() - t0
    excess = max(float(np.max(v - env.value(sol.grid, t))) for t, v in sol.snapshot_items())
    h = sol.history_array
    late = h[h[:, 0] > 1.0, 1]
    rise = float(np.max(np.diff(late)))
    ok = (outcome.kind == "global_up_to" and sol.t == 10.0 and excess <= 1e-6 and rise <= 0.0
          and wall < 60.0)
    _report("AC-4", ok, f"outcome {outcome.kind}; max(u - envelope) = {excess:.3e}; "
                        f"largest sup u increase after t=1: {rise:.3e}; {wall:.2f} s")


def test_ac5_ode_oracle():
    triples = random_ode_triples(100, seed=0)
    t0 = time.perf_counter()
    worst = max(abs(ode_blowup_time(*t) / ode_blowup_time_numeric(*t) - 1) for t in triples)
    wall = time.perf_counter() - t0
    _report("AC-5", worst <= 5e-3 and wall < 1.0, f"worst relative difference {worst:.2e}; {wall:.2f} s")


def test_ac6_fujita_consistency(tmp_path, monkeypatch):
    t0 = time.perf_counter()
    er = exponent_ranges(3, 1.0, 0.0)
    exact = er.fujita_nonexistence_upper == 5 / 3 and er.existence_lower == 5 / 3
    cfg = json.loads((SCENARIOS / "sweep_euclidean_fujita.json").read_text())
    cfg["sweep"] = {"p": [1.5], "amplitude": [1e-2, 1e-1, 1.0]}
    rows = json.loads(Path(sweep(cfg, str(tmp_path / "low"))).read_text())["cells"]
    cfg["sweep"] = {"p": [2.0], "amplitude": [1e-3]}
    high = json.loads(Path(sweep(cfg, str(tmp_path / "high"))).read_text())["cells"]
    wall = time.perf_counter() - t0
    low_ok = all(r["outcome"] in ("blowup", "blowup_certified") for r in rows)
    high_ok = high[0]["outcome"] == "global_up_to" and cfg["solver"]["t_end"] == 10.0
    ok = exact and low_ok and high_ok and wall < 600.0
    cells = ", ".join(f"A={r['amplitude']:g}:{r['outcome']}" for r in rows)
    _report("AC-6", ok, f"bounds {er.fujita_nonexistence_upper!r}/{er.existence_lower!r}; p=1.5 {cells}; "
                        f"p=2 A=1e-3:{high[0]['outcome']}; {wall:.2f} s")


def test_ac7_solver_order():
    t0 = time.perf_counter()
    e512, e1024 = manufactured_error(512), manufactured_error(1024)
    wall = time.perf_counter() - t0
    ratio = e512 / e1024
    _report("AC-7", ratio >= 3.7 and wall < 30.0,
            f"errors {e512:.3e} / {e1024:.3e}, ratio {ratio:.3f}; {wall:.2f} s")


@pytest.mark.parametrize("name", ["thm_3_2_hyperbolic_blowup.json"])
def test_ac8_determinism(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario(str(SCENARIOS / name), str(a))
    run_scenario(str(SCENARIOS / name), str(b))
    csvs = sorted(p.name for p in a.glob("*.csv"))
    same = [filecmp.cmp(a / f, b / f, shallow=False) for f in csvs]
    ok = len(csvs) > 1 and all(same) and sorted(p.name for p in b.glob("*.csv")) == csvs
    _report("AC-8", ok, f"{sum(same)}/{len(csvs)} CSV files bit-identical")
