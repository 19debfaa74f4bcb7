"""Self-check suites behind ``fujitalab verify``.

Each check returns a :class:`Check` carrying the measured residual, the
tolerance it is compared against and the verdict.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .barriers import build_eta, build_gaussian_super, build_phi, build_w
from .criteria import (envelope, exponent_ranges, kaplan_threshold, ode_blowup_time, ode_blowup_time_numeric,
                       weighted_mass)
from .drift import make_drift
from .errors import UsageError
from .geometry import gamma_exponent, integrate_radial, make_model_manifold
from .initial_data import BarrierMultiple, ConstantOnBall
from .solver import SolverConfig, classify_outcome, mass_inequality_residuals, simulate

SUITES = ("geometry", "barriers", "criteria", "solver", "all")


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<44s} residual={self.residual:.3e}  tol={self.tolerance:.1e}  {self.detail}"


def _le(name, residual, tol, detail=""):
    return Check(name, float(residual), float(tol), bool(residual <= tol), detail)


# ---------------------------------------------------------------------------
# geometry


def growth_exponent_fit(beta_bar: float, n: int = 3, r_lo: float = 1e3, r_hi: float = 1e4) -> float:
    """Least-squares slope of ``log |S_R|`` against ``log R`` on ``[r_lo, r_hi]``."""
    m = make_model_manifold("ricci_decay", n, beta_bar)
    R = np.geomspace(r_lo, r_hi, 200)
    return float(np.polyfit(np.log(R), np.log(m.surface_area(R)), 1)[0])


def geometry_checks() -> list[Check]:
    out = []
    for beta in (0.5, 2.0, 6.0):
        target = gamma_exponent(beta) * 2
        slope = growth_exponent_fit(beta)
        out.append(_le(f"sphere growth exponent beta={beta:g}", abs(slope / target - 1), 0.02,
                       f"fit={slope:.5f} gamma(n-1)={target:.5f}"))
    for kind, par in (("euclidean", None), ("hyperbolic", 1.0), ("ricci_decay", 2.0)):
        m = make_model_manifold(kind, 3, par)
        r = np.geomspace(1e-3, 1e3, 2000)
        worst = float(np.max(((m.n - 1) / r - m.mean_curvature(r)) * r))
        out.append(_le(f"F >= (n-1)/r on {kind}", max(worst, 0.0), 1e-9))
    m = make_model_manifold("ricci_decay", 3, 2.0)
    r = np.geomspace(1e-3, 1e3, 500)
    exact = 0.5 * (r + (1 + r * r) * np.arctan(r))
    out.append(_le("ricci_decay beta=2 profile vs closed form", np.max(np.abs(m.psi(r) / exact - 1)), 1e-9))
    e = make_model_manifold("euclidean", 3)
    val = integrate_radial(lambda x: np.exp(-x), e, 80.0)
    out.append(_le("int e^-r over R^3 = 8 pi", abs(val - 8 * math.pi), 1e-9))
    return out


# ---------------------------------------------------------------------------
# barriers


def default_barriers() -> dict:
    """The four reference barriers of the acceptance suite."""
    hyp = make_model_manifold("hyperbolic", 3, 1.0)
    euc = make_model_manifold("euclidean", 3)
    none = make_drift("none")
    return {
        "phi": build_phi(hyp, none, 6.0, R0=1.0),
        "eta": build_eta(euc, none, 0.1, 0.6),
        "w": build_w(hyp, none, 0.75, a=1.0),
        "gaussian_super": build_gaussian_super(euc, none, 2.0, 0.2),
    }


def barrier_checks() -> list[Check]:
    t0 = time.perf_counter()
    built = default_barriers()
    wall = time.perf_counter() - t0
    out = []
    for name, b in built.items():
        cert = b.certificate
        out.append(Check(f"{name} certificate", -cert.min_relative_defect, 1e-12, cert.passed,
                         f"min relative defect {cert.min_relative_defect:.3e}"))
    out.append(_le("barrier construction wall time [s]", wall, 5.0))
    return out


# ---------------------------------------------------------------------------
# criteria


def random_ode_triples(count: int = 100, seed: int = 0) -> list[tuple[float, float, float]]:
    """``(mass0, lam, p)`` with ``p`` in [1.01, 4], ``lam`` in [0, 10] and ``mass0 / threshold`` in [1.01, 100].

    ``p`` stays away from 1 because ``lam^{1/(p-1)}`` overflows a double
    once ``p - 1`` drops below about ``log(10) / 709``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        p = 1.01 + 2.99 * (1.0 - rng.random())
        lam = 10.0 * rng.random()
        ratio = 10 ** rng.uniform(math.log10(1.01), 2.0)
        thr = kaplan_threshold(lam, p) if lam > 0 else 1.0
        out.append((ratio * thr, lam, p))
    return out


def criteria_checks() -> list[Check]:
    out = []
    worst = 0.0
    for m0, lam, p in random_ode_triples():
        a, b = ode_blowup_time(m0, lam, p), ode_blowup_time_numeric(m0, lam, p)
        worst = max(worst, abs(a / b - 1))
    out.append(_le("ODE blow-up time closed form vs RK45", worst, 5e-3, "100 random triples"))
    er = exponent_ranges(3, 1.0, 0.0)
    out.append(_le("exponent ranges coincide at 5/3", abs(er.fujita_nonexistence_upper - 5 / 3)
                   + abs(er.existence_lower - 5 / 3), 0.0))
    hyp = make_model_manifold("hyperbolic", 3, 1.0)
    none = make_drift("none")
    w = build_w(hyp, none, 0.75, a=1.0)
    env = envelope(0.75, 2.0, 0.675, w)
    r = np.linspace(1e-3, 30.0, 600)[None, :]
    t = np.linspace(0.0, 10.0, 41)[:, None]
    dmin = float(np.min(env.supersolution_defect(hyp, none, r, t)))
    out.append(_le("envelope supersolution defect", max(-dmin, 0.0), 1e-10))
    xi = env.xi(np.linspace(0, 50, 501))
    mono = float(max(np.max(-np.diff(xi)), np.max(xi - env.xi_inf), 0.0))
    out.append(_le("xi nondecreasing and below xi(inf)", mono, 1e-12))
    return out


# ---------------------------------------------------------------------------
# solver


def manufactured_error(n_grid: int, r_max: float = 8.0, t_end: float = 1.0) -> float:
    """Max-norm error of Crank-Nicolson for ``u = e^{-t} e^{-r^2}`` on R^3 with ``dt = dr``."""
    e = make_model_manifold("euclidean", 3)
    cfg = SolverConfig(r_max, n_grid, t_end, scheme="imex_cn", dt_max=r_max / (n_grid - 1), safety=1.0)
    src = lambda r, t: (5.0 - 4.0 * r * r) * np.exp(-t - r * r)  # noqa: E731
    sol, _ = simulate(lambda r: np.exp(-r * r), e, make_drift("none"), 2.0, cfg, source=src)
    return float(np.max(np.abs(sol.values - np.exp(-t_end - sol.grid ** 2))))


def blowup_run(n_grid: int = 4096, r_max: float = 40.0):
    """Blow-up regime on H^3: constant datum on B_6 with three times the threshold mass."""
    m = make_model_manifold("hyperbolic", 3, 1.0)
    none = make_drift("none")
    lam, p = 5.0, 2.0
    phi = build_phi(m, none, lam, R0=2.0)
    thr = kaplan_threshold(lam, p)
    unit = weighted_mass(ConstantOnBall(1.0, 6.0), phi, m)
    u0 = ConstantOnBall(3.0 * thr / unit, 6.0)
    cfg = SolverConfig(r_max, n_grid, 1.0, snapshot_times=tuple(np.round(np.arange(0, 1.0001, 0.002), 10)))
    sol, outcome = simulate(u0, m, none, p, cfg, barrier=phi)
    return sol, outcome, ode_blowup_time(3.0 * thr, lam, p), mass_inequality_residuals(sol, lam, p, phi, m)


def global_run(n_grid: int = 4096, r_max: float = 40.0):
    m = make_model_manifold("hyperbolic", 3, 1.0)
    none = make_drift("none")
    w = build_w(m, none, 0.75, a=1.0)
    c_t = 0.9 * kaplan_threshold(0.75, 2.0)
    env = envelope(0.75, 2.0, c_t, w)
    cfg = SolverConfig(r_max, n_grid, 10.0, snapshot_times=tuple(np.round(np.arange(0, 10.0001, 0.1), 10)))
    sol, _ = simulate(BarrierMultiple(w, 0.9 * c_t), m, none, 2.0, cfg)
    return sol, classify_outcome(sol, env), env


def solver_checks() -> list[Check]:
    out = []
    e512, e1024 = manufactured_error(512), manufactured_error(1024)
    out.append(Check("manufactured error ratio 512/1024", e512 / e1024, 3.7, e512 / e1024 >= 3.7,
                     f"errors {e512:.3e}, {e1024:.3e}"))
    sol, outcome, T, res = blowup_run()
    ratio = (outcome.t_est or math.inf) / T
    out.append(Check("blow-up time / ODE time in [0.5, 1.2]", ratio, 1.2,
                     outcome.kind == "blowup" and 0.5 <= ratio <= 1.2, outcome.kind))
    out.append(_le("mass inequality violation", max(-float(res.min()), 0.0), 0.0, f"{res.size} snapshots"))
    out.append(_le("negative clips (blow-up run)", sol.clip_count, 0))
    gsol, goutcome, env = global_run()
    margin = goutcome.envelope_margin if goutcome.envelope_margin is not None else -math.inf
    out.append(_le("envelope excess (global run)", max(-margin, 0.0), 1e-6, goutcome.kind))
    h = gsol.history_array
    late = h[h[:, 0] > 1.0, 1]
    out.append(_le("sup u increase for t > 1", max(float(np.max(np.diff(late))), 0.0), 0.0))
    return out


SUITE_FUNCS: dict[str, Callable[[], list[Check]]] = {
    "geometry": geometry_checks,
    "barriers": barrier_checks,
    "criteria": criteria_checks,
    "solver": solver_checks,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    names = list(SUITE_FUNCS) if name == "all" else [name]
    return [c for n in names for c in SUITE_FUNCS[n]()]
