"""Scenario execution: barriers, criteria, simulation and report assembly."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .barriers import DEFECT_TOL, Barrier, build_eta, build_gaussian_super, build_phi, build_w, eta_min_lambda
from .config import Scenario, load_scenario, plain_datum, scenario_from_dict
from .criteria import (MASS_RTOL, Envelope, KaplanVerdict, envelope, exponent_ranges, find_small_a,
                       kaplan_threshold, mass_test, weighted_mass)
from .errors import FujitaLabError, ParameterError, SchemaError
from .geometry import A1, check_curvature_assumptions, gamma_exponent, measured_c1
from .initial_data import BarrierMultiple, ConstantOnBall
from .solver import (ENVELOPE_TOL, Outcome, classify_outcome, mass_inequality_residuals, simulate,
                     write_history_csv, write_snapshots)
from .svg import line_plot, phase_plot

WORKERS_ENV = "FUJITALAB_WORKERS"


class HypothesisError(ParameterError):
    """A tagged scenario violates one of its hypotheses."""


def manifold_gamma(m) -> float | None:
    """Growth exponent of the model: 1 for Euclidean space, none for hyperbolic space."""
    if m.kind == "euclidean":
        return 1.0
    if m.kind == "ricci_decay":
        return gamma_exponent(m.parameter)
    return None


def _claim(operation: str, tolerance, result) -> dict:
    return {"operation": operation, "tolerance": tolerance, "result": result}


@dataclass
class Evaluation:
    """Everything computed for one scenario, before it is written out."""

    scenario: Scenario
    barriers: dict = field(default_factory=dict)
    barrier_errors: dict = field(default_factory=dict)
    lams: dict = field(default_factory=dict)
    datum: object = None
    verdict: KaplanVerdict | None = None
    weight: Barrier | None = None
    lam: float | None = None
    env: Envelope | None = None
    small_a: object = None
    exponents: object = None
    hypotheses: list = field(default_factory=list)
    solution: object = None
    outcome: Outcome | None = None
    mass_residual: float | None = None
    claims: list = field(default_factory=list)

    @property
    def failed_hypotheses(self) -> list:
        return [h for h in self.hypotheses if not h["passed"]]


def _build_barriers(sc: Scenario) -> tuple[dict, dict, dict]:
    """Build every requested barrier; returns ``(barriers, errors, lambdas)``."""
    m, d, blk = sc.manifold, sc.drift, sc.barriers
    built, errors, lams = {}, {}, {}
    makers = {
        "phi": lambda b: build_phi(m, d, b["lambda"], b.get("c_hat"), b.get("h2"), b.get("R0", 1.0),
                                   b.get("C1", 1.0), a1=b.get("a1")),
        "eta": lambda b: build_eta(m, d, b["a"], b.get("lambda", math.nan), b.get("c_hat"), b.get("sigma"),
                                   c1=b.get("c1")),
        "w": lambda b: build_w(m, d, b["lambda"], a=b.get("a"), h1=b.get("h1"), h2=b.get("h2")),
        "gaussian_super": lambda b: build_gaussian_super(m, d, sc.p, b["eps"], b.get("t0", 1.0)),
    }
    for name in ("phi", "eta", "w", "gaussian_super"):
        if name not in blk:
            continue
        b = dict(blk[name])
        if name == "eta" and "lambda" not in b:
            # smallest admissible lambda for this a
            b["lambda"] = eta_min_lambda(b["a"], b.get("c1", measured_c1(m)), m.n,
                                         b.get("sigma", d.bound("sigma") or 0.0),
                                         b.get("c_hat", d.bound("c_hat") or 0.0))
        if "lambda" in b:
            lams[name] = float(b["lambda"])
        try:
            built[name] = makers[name](b)
        except ParameterError as exc:
            errors[name] = {"message": str(exc), "constraint": exc.constraint, "values": exc.values}
    return built, errors, lams


def _weight(ev: Evaluation) -> tuple[Barrier | None, float | None]:
    """The normalized weight used by the mass test: ``phi`` if usable, else ``eta``."""
    for name in ("phi", "eta"):
        b = ev.barriers.get(name)
        if b is not None and b.normalization is not None:
            return b, ev.lams[name]
    return None, None


def _c_tilde(sc: Scenario, w) -> float:
    b = sc.barriers["w"]
    if "c_tilde" in b:
        return float(b["c_tilde"])
    return b.get("c_tilde_fraction", 0.9) * kaplan_threshold(b["lambda"], sc.p) / w.sup_norm()


def _resolve_datum(ev: Evaluation):
    blk = ev.scenario.raw["initial_datum"]
    u0 = plain_datum(blk)
    if u0 is not None:
        return u0
    if blk["kind"] == "constant_on_ball":
        if ev.weight is None:
            raise HypothesisError("mass_factor needs a normalized phi or eta barrier", "weight barrier present")
        unit = weighted_mass(ConstantOnBall(1.0, blk["radius"]), ev.weight, ev.scenario.manifold)
        amp = blk["mass_factor"] * kaplan_threshold(ev.lam, ev.scenario.p) / unit
        return ConstantOnBall(amp, blk["radius"])
    fam = blk["family"]
    if fam not in ev.barriers:
        raise HypothesisError(f"datum refers to barrier {fam!r}, which is not available", f"{fam} built")
    if "factor" in blk:
        return BarrierMultiple(ev.barriers[fam], blk["factor"])
    if fam != "w":
        raise HypothesisError("fraction_of_c_tilde applies to the w barrier only", "family = w")
    frac = blk.get("fraction_of_c_tilde", 1.0)
    return BarrierMultiple(ev.barriers[fam], frac * _c_tilde(ev.scenario, ev.barriers[fam]))


def _hyp(ev: Evaluation, name: str, passed: bool, **values) -> None:
    ev.hypotheses.append({"constraint": name, "passed": bool(passed), "values": values})


def _below(u0, upper, r) -> float:
    """``max(u0 - upper)`` on the grid ``r``."""
    return float(np.max(np.asarray(u0(r), dtype=float) - np.asarray(upper(r), dtype=float)))


def _check_hypotheses(ev: Evaluation) -> None:
    sc, m = ev.scenario, ev.scenario.manifold
    tag = sc.tag
    r = np.linspace(0.0, 50.0, 5001) if m.kind != "hyperbolic" else np.linspace(0.0, 40.0, 4001)
    for name in ev.barrier_errors:
        _hyp(ev, f"{name} constructible", False, **ev.barrier_errors[name]["values"])
    needs = {"thm_3_2": "phi", "thm_4_2": "w", "thm_5_2": "eta", "thm_6_2": "gaussian_super"}
    if tag in needs:
        fam = needs[tag]
        b = ev.barriers.get(fam)
        _hyp(ev, f"{fam} certificate passes", b is not None and b.certificate.passed)
    if tag in ("thm_3_2", "thm_5_2"):
        fam = needs[tag]
        b = ev.barriers.get(fam)
        _hyp(ev, f"{fam} normalizable", b is not None and b.normalization is not None)
        if ev.verdict is not None:
            _hyp(ev, "mass > lambda^(1/(p-1))", ev.verdict.predicts_blowup,
                 mass=ev.verdict.mass, threshold=ev.verdict.threshold)
    if tag == "thm_4_2":
        _hyp(ev, "0 < C_tilde < lambda^(1/(p-1)) / sup w", ev.env is not None)
        if ev.env is not None:
            gap = _below(ev.datum, lambda x: ev.env.value(x, 0.0), r)
            _hyp(ev, "u0 <= C_tilde w", gap <= 0.0, max_excess=gap)
    if tag == "thm_6_2":
        g = ev.barriers.get("gaussian_super")
        if g is not None:
            gap = _below(ev.datum, lambda x: g.value(x, 0.0), r)
            _hyp(ev, "u0 <= gaussian_super(., 0)", gap <= 0.0, max_excess=gap)
    if tag == "cor_5_3":
        gamma = manifold_gamma(m)
        _hyp(ev, "curvature A1", gamma is not None and
             check_curvature_assumptions(m, A1(m.parameter or 0.0)).passed)
        c_hat = sc.drift.bound("c_hat")
        _hyp(ev, "C_hat = 0", c_hat == 0.0, c_hat=c_hat if c_hat is not None else math.nan)
        if gamma is not None:
            upper = exponent_ranges(m.n, gamma).fujita_nonexistence_upper
            _hyp(ev, "1 < p < 1 + 2/(gamma(n-1)+1)", 1.0 < sc.p < upper, p=sc.p, upper=upper)


def evaluate(sc: Scenario, *, enforce: bool = True, run_solver: bool = True) -> Evaluation:
    """Build barriers, evaluate the criteria, check hypotheses and (optionally) simulate.

    With ``enforce`` a tagged scenario whose hypotheses fail raises
    :class:`HypothesisError` before any simulation is attempted.
    """
    ev = Evaluation(sc)
    m, d, p = sc.manifold, sc.drift, sc.p
    ev.barriers, ev.barrier_errors, ev.lams = _build_barriers(sc)
    ev.weight, ev.lam = _weight(ev)
    for name, b in ev.barriers.items():
        ev.claims.append(_claim(f"build_{name}", DEFECT_TOL, {"passed": b.certificate.passed,
                                                              "min_relative_defect": b.certificate.min_relative_defect}))
    if "w" in ev.barriers:
        try:
            ev.env = envelope(sc.barriers["w"]["lambda"], p, _c_tilde(sc, ev.barriers["w"]), ev.barriers["w"])
            ev.claims.append(_claim("envelope", 0.0, {"c_tilde": ev.env.c_tilde, "xi_inf": ev.env.xi_inf}))
        except ParameterError as exc:
            ev.barrier_errors["envelope"] = {"message": str(exc), "constraint": exc.constraint, "values": exc.values}
    ev.datum = _resolve_datum(ev)
    if ev.weight is not None:
        ev.verdict = mass_test(ev.datum, ev.weight, m, ev.lam, p)
        ev.claims.append(_claim("mass_test", MASS_RTOL, ev.verdict.to_dict()))
    gamma = manifold_gamma(m)
    nu = d.bound("nu")
    if gamma is not None and nu is not None and -m.n < nu <= 0:
        ev.exponents = exponent_ranges(m.n, gamma, nu)
        ev.claims.append(_claim("exponent_ranges", 0.0, ev.exponents.to_dict()))
    _check_hypotheses(ev)
    if enforce and sc.tag != "freeform" and ev.failed_hypotheses:
        first = ev.failed_hypotheses[0]
        raise HypothesisError(f"{sc.tag}: hypothesis '{first['constraint']}' fails", first["constraint"],
                              **{k: v for k, v in first["values"].items() if isinstance(v, (int, float))})
    if sc.tag == "cor_5_3":
        sigma = d.bound("sigma") or 0.0
        ev.small_a = find_small_a(ev.datum, m, sigma, 0.0, measured_c1(m), p, m.n, gamma, d)
        ev.claims.append(_claim("find_small_a", MASS_RTOL, ev.small_a.to_dict()))
    cfg = sc.solver
    if run_solver and cfg is not None:
        sol, _ = simulate(ev.datum, m, d, p, cfg, barrier=ev.weight)
        ev.solution = sol
        env = ev.env if ev.env is not None else ev.barriers.get("gaussian_super")
        if env is not None and _below(ev.datum, lambda x: env.value(x, 0.0), sol.grid) > ENVELOPE_TOL:
            env = None
        ev.outcome = classify_outcome(sol, env)
        ev.claims.append(_claim("classify_outcome", ENVELOPE_TOL, ev.outcome.to_dict()))
        ev.claims.append(_claim("simulate", {"negative_clip": 1e-14}, sol.diagnostics()))
        if ev.weight is not None:
            res = mass_inequality_residuals(sol, ev.lam, p, ev.weight, m, u_cap=cfg.u_cap)
            ev.mass_residual = float(res.min()) if res.size else None
            ev.claims.append(_claim("mass_inequality", "1e-2 max(1, mass^p)",
                                    {"min_residual": ev.mass_residual, "checked": int(res.size),
                                     "passed": ev.mass_residual is None or ev.mass_residual >= 0}))
    return ev


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else (None if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_outputs(ev: Evaluation, out_dir: str, wall: float) -> str:
    os.makedirs(out_dir, exist_ok=True)
    files = []
    if ev.solution is not None:
        write_history_csv(ev.solution, os.path.join(out_dir, "history.csv"))
        files.append("history.csv")
        files += write_snapshots(ev.solution, out_dir)
        h = ev.solution.history_array
        series = [("sup u", h[:, 0], h[:, 1])]
        if not np.all(np.isnan(h[:, 2])):
            series.append(("mass", h[:, 0], h[:, 2]))
        with open(os.path.join(out_dir, "history.svg"), "w") as fh:
            fh.write(line_plot(series, title=ev.scenario.name, xlabel="t", ylabel="value", logy=True))
        files.append("history.svg")
    report = {
        "scenario": ev.scenario.raw,
        "version": __version__,
        "certificates": {k: b.certificate.to_dict() for k, b in ev.barriers.items()},
        "barrier_errors": ev.barrier_errors,
        "hypotheses": ev.hypotheses,
        "claims": ev.claims,
        "verdicts": {
            "kaplan": None if ev.verdict is None else ev.verdict.to_dict(),
            "outcome": None if ev.outcome is None else ev.outcome.to_dict(),
            "small_a": None if ev.small_a is None else ev.small_a.to_dict(),
        },
        "files": files,
        "wall_time_s": wall,
    }
    path = os.path.join(out_dir, "report.json")
    write_json(report, path)
    return path


def _scenario(config) -> Scenario:
    return scenario_from_dict(config) if isinstance(config, dict) else load_scenario(config)


def run_scenario(config, out_dir: str) -> str:
    """Evaluate a scenario (path or dict) and write its artifacts; returns the report path."""
    t0 = time.perf_counter()
    sc = _scenario(config)
    ev = evaluate(sc)
    return write_outputs(ev, out_dir, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# sweep


def _cell(args) -> dict:
    raw, p, amp, small_a = args
    row = {"p": p, "amplitude": amp, "outcome": "inconclusive", "t_blowup": math.nan, "margin": math.nan,
           "note": ""}
    try:
        sc = scenario_from_dict(raw).with_cell(p, amp)
        ev = evaluate(sc, enforce=False)
        out = ev.outcome
        if out is not None:
            row["outcome"] = out.kind
            if out.kind == "blowup":
                row["t_blowup"] = out.t_est
            if out.envelope_margin is not None:
                row["margin"] = out.envelope_margin
            if out.kind == "inconclusive":
                row["note"] = out.reason
        gamma = manifold_gamma(sc.manifold)
        if (small_a and row["outcome"] != "blowup" and gamma is not None
                and sc.drift.bound("c_hat") == 0.0
                and p < exponent_ranges(sc.manifold.n, gamma).fujita_nonexistence_upper):
            res = find_small_a(ev.datum, sc.manifold, sc.drift.bound("sigma") or 0.0, 0.0,
                               measured_c1(sc.manifold), p, sc.manifold.n, gamma, sc.drift)
            if res.certified:
                row["outcome"] = "blowup_certified"
                # the Kaplan ODE time bounds the blow-up time from above
                row["t_blowup"] = res.verdict.ode_blowup_time
                row["note"] = f"small-a certificate a={res.a:.6g}"
    except (FujitaLabError, ArithmeticError) as exc:
        row["outcome"] = "inconclusive"
        row["note"] = f"{type(exc).__name__}: {exc}"
    return row


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return max(1, min(4, os.cpu_count() or 1))


def sweep(config, out_dir: str) -> str:
    """Run every ``(p, amplitude)`` cell and write ``sweep.csv``, ``sweep.svg`` and ``sweep_report.json``."""
    t0 = time.perf_counter()
    sc = _scenario(config)
    blk = sc.raw.get("sweep")
    if blk is None:
        raise SchemaError("sweep: scenario has no 'sweep' block")
    if sc.solver is None:
        raise SchemaError("solver: a sweep needs a solver block")
    cells = [(sc.raw, float(p), float(a), blk.get("small_a", True)) for p in blk["p"] for a in blk["amplitude"]]
    workers = worker_count()
    if workers == 1 or len(cells) == 1:
        rows = [_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell, cells))
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["p", "amplitude", "outcome", "t_blowup", "margin"])
        for r in rows:
            wr.writerow([format(r["p"], ".17g"), format(r["amplitude"], ".17g"), r["outcome"],
                         "" if math.isnan(r["t_blowup"]) else format(r["t_blowup"], ".17g"),
                         "" if math.isnan(r["margin"]) else format(r["margin"], ".17g")])
    vlines = []
    gamma = manifold_gamma(sc.manifold)
    nu = sc.drift.bound("nu")
    if gamma is not None and nu is not None and -sc.manifold.n < nu <= 0:
        er = exponent_ranges(sc.manifold.n, gamma, nu)
        vlines = [("nonexistence upper", er.fujita_nonexistence_upper), ("existence lower", er.existence_lower)]
    with open(os.path.join(out_dir, "sweep.svg"), "w") as fh:
        fh.write(phase_plot([(r["p"], r["amplitude"], r["outcome"]) for r in rows], vlines=vlines,
                            title=sc.name))
    path = os.path.join(out_dir, "sweep_report.json")
    write_json({"scenario": sc.raw, "version": __version__, "cells": rows, "workers": workers,
                "files": ["sweep.csv", "sweep.svg"], "wall_time_s": time.perf_counter() - t0}, path)
    return path
