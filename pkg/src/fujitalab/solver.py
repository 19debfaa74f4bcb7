"""Radial finite-difference solver for ``u_t = u_rr + (F + b) u_r + u^p``.

The linear part is treated implicitly (one tridiagonal solve per step) and
the reaction explicitly, so the step size is governed by the reaction alone:
``dt = safety * min(dt_max, 0.1 / |u|_inf^{p-1})``.  The outer boundary
carries a homogeneous Dirichlet condition, which makes the truncated problem
a subsolution of the problem on the whole manifold.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .barriers import Barrier
from .drift import RadialDriftField
from .errors import ConfigurationError, NumericError
from .geometry import ModelManifold, sphere_area

SCHEMES = ("imex_be", "imex_cn")
NEG_TOL = 1e-14
# absolute slack of the envelope comparison
ENVELOPE_TOL = 1e-6
# Gauss-Legendre points per cell for the mass weights
_MASS_NODES = 4


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and stopping parameters.

    ``grading`` stretches the grid geometrically towards the pole: cell
    widths grow by the factor ``exp(grading / (n_grid - 1))``; ``0`` gives a
    uniform grid.  ``dt_max`` defaults to ``t_end / 200``.
    """

    r_max: float
    n_grid: int
    t_end: float
    u_cap: float = 1e8
    dt_min: float = 1e-12
    safety: float = 0.5
    scheme: str = "imex_be"
    snapshot_times: tuple[float, ...] = ()
    dt_max: float | None = None
    grading: float = 0.0

    def __post_init__(self):
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ConfigurationError(f"r_max must be positive, got {self.r_max!r}")
        if int(self.n_grid) != self.n_grid or self.n_grid < 16:
            raise ConfigurationError(f"n_grid must be an integer >= 16, got {self.n_grid!r}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigurationError(f"t_end must be positive, got {self.t_end!r}")
        if not self.u_cap > 1:
            raise ConfigurationError(f"u_cap must exceed 1, got {self.u_cap!r}")
        if not self.dt_min > 0:
            raise ConfigurationError(f"dt_min must be positive, got {self.dt_min!r}")
        if not (0 < self.safety <= 1):
            raise ConfigurationError(f"safety must lie in (0, 1], got {self.safety!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.dt_max is not None and not self.dt_max > 0:
            raise ConfigurationError(f"dt_max must be positive, got {self.dt_max!r}")
        if self.grading < 0:
            raise ConfigurationError(f"grading must be >= 0, got {self.grading!r}")
        times = tuple(sorted(float(t) for t in self.snapshot_times))
        if any(t < 0 or t > self.t_end for t in times):
            raise ConfigurationError("snapshot times must lie in [0, t_end]")
        object.__setattr__(self, "snapshot_times", times)
        object.__setattr__(self, "n_grid", int(self.n_grid))

    @property
    def step_cap(self) -> float:
        return self.dt_max if self.dt_max is not None else self.t_end / 200.0

    def to_dict(self) -> dict:
        return {"r_max": self.r_max, "n_grid": self.n_grid, "t_end": self.t_end, "u_cap": self.u_cap,
                "dt_min": self.dt_min, "safety": self.safety, "scheme": self.scheme,
                "snapshot_times": list(self.snapshot_times), "dt_max": self.dt_max, "grading": self.grading}


def make_grid(cfg: SolverConfig) -> np.ndarray:
    x = np.linspace(0.0, 1.0, cfg.n_grid)
    if cfg.grading == 0:
        r = cfg.r_max * x
    else:
        r = cfg.r_max * np.expm1(cfg.grading * x) / math.expm1(cfg.grading)
    r[-1] = cfg.r_max
    return r


@dataclass
class RadialSolution:
    """Grid, current state and the step-by-step record of a run.

    ``history`` rows are ``(t, sup_u, mass, dt)``; ``mass`` is NaN when no
    weight barrier was supplied.  ``snapshots`` maps each stored time to a
    copy of the nodal values.
    """

    grid: np.ndarray
    t: float
    values: np.ndarray
    history: list[tuple[float, float, float, float]] = field(default_factory=list)
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    halt_reason: str = ""
    clip_count: int = 0
    min_before_clip: float = 0.0
    boundary_flux: float = 0.0
    steps: int = 0

    @property
    def history_array(self) -> np.ndarray:
        return np.array(self.history, dtype=float).reshape(-1, 4)

    def snapshot_items(self) -> list[tuple[float, np.ndarray]]:
        return sorted(self.snapshots.items())

    def diagnostics(self) -> dict:
        return {"halt_reason": self.halt_reason, "t": self.t, "steps": self.steps,
                "clip_count": self.clip_count, "min_before_clip": self.min_before_clip,
                "boundary_flux": self.boundary_flux}


@dataclass(frozen=True)
class Outcome:
    """``blowup``, ``global_up_to`` or ``inconclusive``."""

    kind: str
    t_est: float | None = None
    t_end: float | None = None
    envelope_margin: float | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "blowup":
            out["t_est"] = self.t_est
        elif self.kind == "global_up_to":
            out["t_end"] = self.t_end
            out["envelope_margin"] = self.envelope_margin
        else:
            out["reason"] = self.reason
        return out


# ---------------------------------------------------------------------------
# spatial operator


def effective_dimension(m: ModelManifold, drift: RadialDriftField) -> float:
    d = drift.effective_dimension(m)
    if not (math.isfinite(d) and d > 0):
        raise ConfigurationError(f"origin stencil undefined: 1 + lim r(F + b) = {d!r} must be positive")
    return d


def operator_bands(grid: np.ndarray, m: ModelManifold, drift: RadialDriftField) -> np.ndarray:
    """Tridiagonal matrix of the discrete operator in ``solve_banded`` layout.

    Row 0 holds the super-diagonal, row 1 the diagonal and row 2 the
    sub-diagonal.  The outer row is zero (Dirichlet node).
    """
    r = np.asarray(grid, dtype=float)
    N = r.size
    if N < 3:
        raise ConfigurationError("grid needs at least 3 nodes")
    d_eff = effective_dimension(m, drift)
    ab = np.zeros((3, N))
    h = np.diff(r)
    hm, hp = h[:-1], h[1:]
    ri = r[1:-1]
    c = m.mean_curvature(ri) + drift.b(ri)
    s = hm + hp
    # u'' on a nonuniform 3-point stencil
    lo2, up2 = 2.0 / (hm * s), 2.0 / (hp * s)
    # u' weighted so that it is exact for quadratics
    lo1 = -hp / (hm * s)
    up1 = hm / (hp * s)
    mid1 = (hp - hm) / (hm * hp)
    ab[1, 1:-1] = -(lo2 + up2) + c * mid1
    ab[0, 2:] = up2 + c * up1
    ab[2, :-2] = lo2 + c * lo1
    k = 2.0 * d_eff / h[0] ** 2
    ab[1, 0] = -k
    ab[0, 1] = k
    return ab


def _banded_matvec(ab: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out


def apply_spatial_operator(sol: RadialSolution, m: ModelManifold, drift: RadialDriftField) -> np.ndarray:
    """``u_rr + (F + b) u_r`` at every node; the pole uses ``2 d_eff (u_1 - u_0) / dr^2``, the outer node is 0."""
    return _banded_matvec(operator_bands(sol.grid, m, drift), np.asarray(sol.values, dtype=float))


# ---------------------------------------------------------------------------
# mass functional


def mass_weights(grid: np.ndarray, barrier: Barrier, m: ModelManifold) -> np.ndarray:
    """Nodal weights ``q`` with ``q @ u = c int u phi dmu`` for the piecewise-linear interpolant of ``u``."""
    if barrier.normalization is None:
        raise ConfigurationError(f"{barrier.family} barrier carries no normalization")
    r = np.asarray(grid, dtype=float)
    x, wx = np.polynomial.legendre.leggauss(_MASS_NODES)
    a, h = r[:-1, None], np.diff(r)[:, None]
    X = a + 0.5 * h * (x[None, :] + 1.0)
    g = np.exp(barrier.log_value(X) + (m.n - 1) * m.log_psi(X)) * sphere_area(m.n) * barrier.normalization
    right = (X - a) / h
    wg = 0.5 * h * wx[None, :] * g
    q = np.zeros(r.size)
    q[:-1] += np.sum(wg * (1.0 - right), axis=1)
    q[1:] += np.sum(wg * right, axis=1)
    return q


def mass_series(sol: RadialSolution, barrier: Barrier, m: ModelManifold) -> tuple[np.ndarray, np.ndarray]:
    """``(times, c int u(t) phi dmu)`` over the stored snapshots."""
    q = mass_weights(sol.grid, barrier, m)
    items = sol.snapshot_items()
    times = np.array([t for t, _ in items], dtype=float)
    return times, np.array([float(q @ v) for _, v in items], dtype=float)


# ---------------------------------------------------------------------------
# time stepping


def _initial_values(u0, grid: np.ndarray) -> np.ndarray:
    v = np.array(np.broadcast_to(np.asarray(u0(grid), dtype=float), grid.shape), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NumericError("initial datum is not finite on the grid", time=0.0)
    if np.any(v < 0):
        raise ConfigurationError("initial datum must be nonnegative")
    v[-1] = 0.0
    return v


def simulate(u0, m: ModelManifold, drift: RadialDriftField, p: float, cfg: SolverConfig, *,
             barrier: Barrier | None = None,
             source: Callable[[np.ndarray, float], np.ndarray] | None = None) -> tuple[RadialSolution, Outcome]:
    """Integrate the radial problem from ``u0`` until ``t_end``, ``u_cap`` or ``dt_min``.

    Parameters
    ----------
    u0 : callable
        Nonnegative radial datum, evaluated on the grid.
    barrier : Barrier, optional
        Normalized weight; when given, the history records its mass.
    source : callable, optional
        ``source(r, t)`` replaces the reaction ``u^p`` (manufactured-solution
        studies).  Evaluated at ``t + dt`` for backward Euler and at
        ``t + dt/2`` for Crank-Nicolson.

    Returns
    -------
    (RadialSolution, Outcome)
        The outcome is :func:`classify_outcome` without an envelope.
    """
    if source is None and not p > 1:
        raise ConfigurationError(f"need p > 1, got {p!r}")
    grid = make_grid(cfg)
    ab = operator_bands(grid, m, drift)
    u = _initial_values(u0, grid)
    q = mass_weights(grid, barrier, m) if barrier is not None else None
    theta = 0.5 if cfg.scheme == "imex_cn" else 1.0
    N = grid.size
    dr_out = grid[-1] - grid[-2]

    def mass(v):
        return float(q @ v) if q is not None else math.nan

    sol = RadialSolution(grid=grid, t=0.0, values=u.copy())
    sol.history.append((0.0, float(np.max(u)), mass(u), 0.0))
    sol.snapshots[0.0] = u.copy()
    pending = [t for t in cfg.snapshot_times if t > 0.0]
    eye = np.zeros((3, N))
    eye[1] = 1.0
    cached_dt = None
    lhs = None
    t = 0.0
    while True:
        sup = float(np.max(u))
        if sup >= cfg.u_cap:
            sol.halt_reason = "u_cap"
            break
        if t >= cfg.t_end:
            sol.halt_reason = "t_end"
            break
        dt = cfg.step_cap
        if source is None and sup > 0:
            dt = min(dt, 0.1 / sup ** (p - 1.0))
        dt *= cfg.safety
        if dt < cfg.dt_min:
            sol.halt_reason = "dt_min"
            break
        target = pending[0] if pending else cfg.t_end
        t_new = t + dt
        # land exactly on the next output time, never leaving a sliver behind
        if t_new >= target or target - t_new < 1e-3 * dt:
            t_new = target
            dt = target - t
        if lhs is None or dt != cached_dt:
            lhs = eye - theta * dt * ab
            lhs[:, -1] = 0.0
            lhs[1, -1] = 1.0
            lhs[2, -2] = 0.0
            cached_dt = dt
        rhs = u.copy()
        if theta < 1.0:
            rhs += (1.0 - theta) * dt * _banded_matvec(ab, u)
        if source is None:
            rhs += dt * u ** p
        else:
            rhs += dt * np.asarray(source(grid, t + theta * dt), dtype=float)
        rhs[-1] = 0.0
        new = solve_banded((1, 1), lhs, rhs, overwrite_ab=False, check_finite=False)
        if not np.all(np.isfinite(new)):
            sol.values = u
            raise NumericError(f"non-finite state after t={t:.17g}", time=t)
        lo = float(np.min(new))
        sol.min_before_clip = min(sol.min_before_clip, lo)
        if lo < 0:
            sol.clip_count += int(np.count_nonzero(new < -NEG_TOL))
            np.maximum(new, 0.0, out=new)
        u = new
        t = t_new
        sol.steps += 1
        sol.boundary_flux = max(sol.boundary_flux, float(u[-2]) / dr_out)
        sol.history.append((t, float(np.max(u)), mass(u), dt))
        if pending and t == pending[0]:
            sol.snapshots[t] = u.copy()
            pending.pop(0)
    sol.t = t
    sol.values = u
    if sol.halt_reason != "t_end" or t not in sol.snapshots:
        sol.snapshots[t] = u.copy()
    return sol, classify_outcome(sol)


def classify_outcome(sol: RadialSolution, envelope=None) -> Outcome:
    """Turn a finished run into a verdict.

    ``envelope`` is anything with ``value(r, t)``; its margin is the minimum
    of ``envelope - u`` over all stored snapshots.  Margins down to
    ``-ENVELOPE_TOL`` (round-off in the far tail) still count as staying
    below the envelope.
    """
    hist = sol.history_array
    if sol.halt_reason == "u_cap":
        return Outcome("blowup", t_est=sol.t)
    if sol.halt_reason == "dt_min":
        if hist.shape[0] >= 2 and hist[-1, 1] > hist[-2, 1]:
            return Outcome("blowup", t_est=sol.t)
        return Outcome("inconclusive", reason="step size collapsed without growth")
    if envelope is not None:
        margin = min(float(np.min(np.asarray(envelope.value(sol.grid, t), dtype=float) - v))
                     for t, v in sol.snapshot_items())
        if margin >= -ENVELOPE_TOL:
            return Outcome("global_up_to", t_end=sol.t, envelope_margin=margin)
        return Outcome("inconclusive", reason=f"envelope exceeded by {-margin:.3g}")
    t_end = sol.t
    sup_then = float(np.interp(0.1 * t_end, hist[:, 0], hist[:, 1]))
    if hist[-1, 1] >= 2.0 * sup_then and hist[-1, 1] > 0:
        return Outcome("inconclusive", reason="still growing")
    return Outcome("global_up_to", t_end=t_end)


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_filename(t: float) -> str:
    return f"profile_t{t:.6g}.csv"


def write_history_csv(sol: RadialSolution, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "sup_u", "mass", "dt"])
        for row in sol.history:
            wr.writerow([_fmt(x) for x in row])


def write_snapshots(sol: RadialSolution, directory: str | os.PathLike) -> list[str]:
    names = []
    for t, v in sol.snapshot_items():
        name = snapshot_filename(t)
        with open(os.path.join(directory, name), "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["r", "u"])
            for r, x in zip(sol.grid, v):
                wr.writerow([_fmt(r), _fmt(x)])
        names.append(name)
    return names


def mass_inequality_residuals(sol: RadialSolution, lam: float, p: float, barrier: Barrier,
                              m: ModelManifold, *, u_cap: float = 1e8,
                              times: Sequence[float] | None = None) -> np.ndarray:
    """``d(mass)/dt - (mass^p - lam mass) + tol`` at the stored snapshots.

    The derivative is the centred difference of the per-step mass record;
    ``tol = 1e-2 max(1, mass^p)``.  Only snapshots with ``sup u < u_cap/10``
    are checked, and only while the barrier's value at ``r_max`` times
    ``sup u`` stays below ``1e-10``.  Nonnegative entries mean the
    inequality holds.
    """
    hist = sol.history_array
    tt, mass = hist[:, 0], hist[:, 2]
    if np.all(np.isnan(mass)):
        raise ConfigurationError("run carries no mass record; pass barrier= to simulate")
    dm = np.gradient(mass, tt)
    edge = float(barrier.value(sol.grid[-1]))
    sel = times if times is not None else [t for t, _ in sol.snapshot_items()]
    out = []
    for t in sel:
        k = int(np.searchsorted(tt, t))
        k = min(k, tt.size - 1)
        sup = hist[k, 1]
        if sup >= u_cap / 10.0 or edge * sup >= 1e-10:
            continue
        y = mass[k]
        tol = 1e-2 * max(1.0, y ** p)
        out.append(dm[k] - (y ** p - lam * y) + tol)
    return np.array(out, dtype=float)
