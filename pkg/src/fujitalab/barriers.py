"""Explicit radial barriers and their admissibility certificates.

Four weights are constructed:

``phi``
    ``C2 exp(-a2 r^2)`` inside ``B_R0`` glued C^1 to ``C1 exp(-a1 r)`` outside.
    Satisfies ``L* phi + lambda phi >= 0`` where ``L* phi = phi'' + (F - b) phi' - (div b) phi``
    is the formal adjoint of the drift-diffusion operator.  Normalized, it
    serves as the weight of the mass functional in the blow-up argument on
    negatively curved models.
``eta``
    ``exp(-a r^2)``; same inequality, used on manifolds whose curvature decays.
``w``
    ``exp(-a r)``; stationary supersolution ``w'' + (F + b) w' + lambda w <= 0``.
``gaussian_super``
    ``C (t + t0)^{-alpha} exp(-r^2 / (4 (t + t0)))``, a global-in-time
    supersolution of ``u_t = Lu + u^p``.

Defects are reported with the convention "nonnegative means the required
inequality holds".  Every builder verifies its inequality on a grid rather
than trusting the closed-form parameter bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .drift import RadialDriftField
from .errors import ParameterError, UsageError
from .geometry import (A0, A1, ModelManifold, check_curvature_assumptions, integrate_radial_log,
                       measured_c1, tail_radius)

DEFECT_TOL = 1e-12
GRID_POINTS = 4096
GRID_R_MIN = 1e-4
GRID_R_MAX = 50.0


def defect_grid(r_max: float = GRID_R_MAX, points: int = GRID_POINTS, r_min: float = GRID_R_MIN) -> np.ndarray:
    """Log-spaced radii on ``[r_min, r_max]``; the pole is handled by a separate limit."""
    return np.geomspace(r_min, r_max, points)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class ConstraintCheck:
    """One checked inequality.

    ``max_violation`` is positive when the inequality fails.  Checks with
    ``required=False`` are informational (e.g. integrability) and do not
    affect :attr:`Certificate.passed`.
    """

    constraint: str
    formula: str
    closed_form_bound: float | None
    verified_bound: float | None
    max_violation: float
    passed: bool
    required: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        out = {
            "constraint": self.constraint,
            "formula": self.formula,
            "closed_form_bound": self.closed_form_bound,
            "verified_bound": self.verified_bound,
            "max_violation": self.max_violation,
            "passed": self.passed,
            "required": self.required,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class Certificate:
    checks: tuple[ConstraintCheck, ...]
    grid_points: int
    min_relative_defect: float
    normalizable: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.constraint == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "normalizable": self.normalizable,
            "grid_points": self.grid_points,
            "min_relative_defect": self.min_relative_defect,
            "checks": [c.to_dict() for c in self.checks],
        }


def _defect_check(name: str, formula: str, rel: np.ndarray, tol: float = DEFECT_TOL) -> ConstraintCheck:
    worst = float(np.min(rel))
    return ConstraintCheck(name, formula, None, None, -worst, worst >= -tol)


def _bound_checks(drift: RadialDriftField, m: ModelManifold, names: tuple[str, ...], r_max: float) -> list[ConstraintCheck]:
    formulas = {"b0": "b(r) >= b0", "b1": "b(r) >= b1", "sigma": "b(r) >= -sigma/r",
                "nu": "b(r) >= nu/r", "c_hat": "div b <= C_hat"}
    out = []
    for bc in drift.check_bounds(m, (GRID_R_MIN, r_max)):
        if bc.name in names:
            viol = (bc.declared - bc.worst) if bc.name != "c_hat" else (bc.worst - bc.declared)
            if bc.name == "sigma":
                viol = -bc.declared - bc.worst
            out.append(ConstraintCheck(f"drift_{bc.name}", formulas[bc.name], bc.declared, None,
                                       float(viol), bc.passed))
    return out


# ---------------------------------------------------------------------------
# barrier types


@dataclass(frozen=True)
class Barrier:
    """Common interface: value and radial derivatives, plus log-derivative ratios.

    The ratios ``d1/value`` and ``d2/value`` are what the defect formulas
    need; using them avoids underflow of the value itself at large radii.
    """

    family: ClassVar[str] = ""
    normalization: float | None = field(default=None, kw_only=True)
    certificate: Certificate | None = field(default=None, kw_only=True, compare=False)

    def value(self, r):
        return np.exp(self.log_value(r))

    def d1(self, r):
        return self.value(r) * self.ratio1(r)

    def d2(self, r):
        return self.value(r) * self.ratio2(r)

    def log_value(self, r):  # pragma: no cover - abstract
        raise NotImplementedError

    def ratio1(self, r):  # pragma: no cover - abstract
        raise NotImplementedError

    def ratio2(self, r):  # pragma: no cover - abstract
        raise NotImplementedError

    def sup_norm(self) -> float:
        return float(self.value(0.0))

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def params(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "parameters": self.params(),
            "normalization": self.normalization,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


@dataclass(frozen=True)
class PhiBarrier(Barrier):
    family: ClassVar[str] = "phi"
    a1: float
    R0: float
    C1: float = 1.0

    @property
    def a2(self) -> float:
        # matching derivatives at R0 forces a2 = a1 / (2 R0)
        return self.a1 / (2.0 * self.R0)

    @property
    def C2(self) -> float:
        return self.C1 * math.exp(-self.a1 * self.R0 + self.a2 * self.R0 ** 2)

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        inner = math.log(self.C2) - self.a2 * r * r
        outer = math.log(self.C1) - self.a1 * r
        return np.where(r < self.R0, inner, outer)

    def ratio1(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.R0, -2.0 * self.a2 * r, -self.a1)

    def ratio2(self, r):
        r = np.asarray(r, dtype=float)
        a2 = self.a2
        return np.where(r < self.R0, 4.0 * a2 * a2 * r * r - 2.0 * a2, self.a1 ** 2)

    def inner_value(self, r):
        return self.C2 * np.exp(-self.a2 * np.asarray(r, dtype=float) ** 2)

    def outer_value(self, r):
        return self.C1 * np.exp(-self.a1 * np.asarray(r, dtype=float))

    def breakpoints(self) -> tuple[float, ...]:
        return (self.R0,)

    def params(self) -> dict:
        return {"a1": self.a1, "a2": self.a2, "R0": self.R0, "C1": self.C1, "C2": self.C2}


@dataclass(frozen=True)
class EtaBarrier(Barrier):
    family: ClassVar[str] = "eta"
    a: float

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        return -self.a * r * r

    def ratio1(self, r):
        return -2.0 * self.a * np.asarray(r, dtype=float)

    def ratio2(self, r):
        r = np.asarray(r, dtype=float)
        return 4.0 * self.a ** 2 * r * r - 2.0 * self.a

    def params(self) -> dict:
        return {"a": self.a}


@dataclass(frozen=True)
class WBarrier(Barrier):
    family: ClassVar[str] = "w"
    a: float
    lam: float = 0.0
    sigma_spectral: float = 0.0

    def log_value(self, r):
        return -self.a * np.asarray(r, dtype=float)

    def ratio1(self, r):
        return np.full_like(np.asarray(r, dtype=float), -self.a)

    def ratio2(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.a ** 2)

    def a_roots(self) -> tuple[float, float]:
        s = self.sigma_spectral
        d = math.sqrt(max(s * s - 4.0 * self.lam, 0.0))
        return 0.5 * (s - d), 0.5 * (s + d)

    def params(self) -> dict:
        return {"a": self.a, "lambda": self.lam, "sigma_spectral": self.sigma_spectral}


@dataclass(frozen=True)
class GaussianSupersolution(Barrier):
    """Time-dependent supersolution; value/derivatives take ``(r, t)``."""

    family: ClassVar[str] = "gaussian_super"
    C: float
    alpha: float
    t0: float
    eps: float
    p: float
    nu: float = 0.0

    def log_value(self, r, t=0.0):
        r = np.asarray(r, dtype=float)
        tau = np.asarray(t, dtype=float) + self.t0
        return math.log(self.C) - self.alpha * np.log(tau) - r * r / (4.0 * tau)

    def value(self, r, t=0.0):
        return np.exp(self.log_value(r, t))

    def ratio1(self, r, t=0.0):
        return -np.asarray(r, dtype=float) / (2.0 * (np.asarray(t, dtype=float) + self.t0))

    def ratio2(self, r, t=0.0):
        r = np.asarray(r, dtype=float)
        tau = np.asarray(t, dtype=float) + self.t0
        return r * r / (4.0 * tau * tau) - 1.0 / (2.0 * tau)

    def d1(self, r, t=0.0):
        return self.value(r, t) * self.ratio1(r, t)

    def d2(self, r, t=0.0):
        return self.value(r, t) * self.ratio2(r, t)

    def ratio_t(self, r, t=0.0):
        r = np.asarray(r, dtype=float)
        tau = np.asarray(t, dtype=float) + self.t0
        return -self.alpha / tau + r * r / (4.0 * tau * tau)

    def sup_norm(self) -> float:
        return float(self.value(0.0, 0.0))

    def params(self) -> dict:
        return {"C": self.C, "alpha": self.alpha, "t0": self.t0, "eps": self.eps, "p": self.p, "nu": self.nu}


# ---------------------------------------------------------------------------
# defects


def _relative_stationary(barrier: Barrier, m: ModelManifold, drift: RadialDriftField, lam: float, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    F = m.mean_curvature(r)
    b = drift.b(r)
    q1, q2 = barrier.ratio1(r), barrier.ratio2(r)
    if isinstance(barrier, (PhiBarrier, EtaBarrier)):
        return q2 + (F - b) * q1 + lam - drift.divergence(m, r)
    return -(q2 + (F + b) * q1 + lam)


def _origin_stationary(barrier: Barrier, m: ModelManifold, drift: RadialDriftField, lam: float) -> float:
    """Limit of the relative stationary defect at the pole."""
    rF, rb = m.origin_rF(), drift.origin_rb()
    if isinstance(barrier, (PhiBarrier, EtaBarrier)):
        # value'/value ~ q r near 0 with q = phi''(0)/phi(0)
        q = float(barrier.ratio2(0.0))
        return q * (1.0 + rF - rb) + lam - drift.origin_divergence(m)
    # w has a conical tip: -(F + b) w' -> +inf whenever n - 1 + lim r b > 0
    s = rF + rb
    if s == 0:
        return -(barrier.a ** 2 + lam)
    return math.copysign(math.inf, s)


def stationary_defect(barrier: Barrier, m: ModelManifold, drift: RadialDriftField, lam: float, r):
    """Pointwise defect of the elliptic barrier inequality at ``r > 0``.

    ``phi``/``eta``: ``v'' + (F - b) v' + (lam - div b) v``.
    ``w``:           ``-(v'' + (F + b) v' + lam v)``.
    Nonnegative values mean the inequality holds at ``r``.
    """
    if isinstance(barrier, GaussianSupersolution):
        raise UsageError("gaussian_super is time dependent; use parabolic_defect")
    r = np.asarray(r, dtype=float)
    return barrier.value(r) * _relative_stationary(barrier, m, drift, lam, r)


def _relative_parabolic(g: GaussianSupersolution, m: ModelManifold, drift: RadialDriftField, r, t):
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = t + g.t0
    with np.errstate(invalid="ignore"):
        rF = np.where(r > 0, r * m.mean_curvature(np.where(r > 0, r, 1.0)), m.origin_rF())
        rb = np.where(r > 0, r * drift.b(np.where(r > 0, r, 1.0)), drift.origin_rb())
    lin = (-g.alpha + 0.5 + 0.5 * rF + 0.5 * rb) / tau
    return lin - g.value(r, t) ** (g.p - 1.0)


def parabolic_defect(barrier: Barrier, m: ModelManifold, drift: RadialDriftField, p: float, r, t):
    """``u_t - u'' - (F + b) u' - u^p`` for the Gaussian supersolution; ``r = 0`` allowed."""
    if not isinstance(barrier, GaussianSupersolution):
        raise UsageError(f"parabolic_defect needs gaussian_super, got {barrier.family}")
    if p != barrier.p:
        barrier = GaussianSupersolution(barrier.C, barrier.alpha, barrier.t0, barrier.eps, p, barrier.nu)
    return barrier.value(r, t) * _relative_parabolic(barrier, m, drift, r, t)


def relative_defects(barrier: Barrier, m: ModelManifold, drift: RadialDriftField, lam: float,
                     r_max: float = GRID_R_MAX, points: int = GRID_POINTS) -> np.ndarray:
    """Relative defects on the certificate grid, pole limit first."""
    r = defect_grid(r_max, points)
    if isinstance(barrier, PhiBarrier):
        r = r[np.abs(r - barrier.R0) > 1e-12 * barrier.R0]
    rel = _relative_stationary(barrier, m, drift, lam, r)
    return np.concatenate(([_origin_stationary(barrier, m, drift, lam)], rel))


# ---------------------------------------------------------------------------
# phi


@dataclass(frozen=True)
class A1Interval:
    """Admissible range of the outer decay rate ``a1`` of ``phi``.

    ``closed_outer`` / ``closed_inner`` are the sufficient bounds obtained
    from the mean-curvature comparison; ``verified_upper`` is the largest
    rate for which the grid defect stays nonnegative (found by continuation
    from the closed-form bound and bisection).  With ``require_integrable``
    the interval is ``(lower, upper]`` with ``lower = (n-1) h2``.
    """

    closed_outer: float
    closed_inner: float
    verified_upper: float
    integrable_lower: float
    require_integrable: bool

    @property
    def closed_form(self) -> float:
        return min(self.closed_outer, self.closed_inner)

    @property
    def lower(self) -> float:
        return self.integrable_lower if self.require_integrable else 0.0

    @property
    def upper(self) -> float:
        return self.verified_upper

    @property
    def empty(self) -> bool:
        return self.upper <= self.lower

    def to_dict(self) -> dict:
        return {
            "closed_outer": self.closed_outer,
            "closed_inner": self.closed_inner,
            "closed_form": self.closed_form,
            "verified_upper": self.verified_upper,
            "integrable_lower": self.integrable_lower,
            "lower": self.lower,
            "upper": self.upper,
        }


def _phi_min_defect(a1, R0, m, drift, lam, r_max, points):
    return float(np.min(relative_defects(PhiBarrier(a1, R0), m, drift, lam, r_max, points)))


def admissible_a1(lam: float, c_hat: float, h2: float, R0: float, b0: float, n: int,
                  require_integrable: bool, m: ModelManifold, drift: RadialDriftField, *,
                  r_max: float | None = None, points: int = GRID_POINTS) -> A1Interval:
    """Closed-form and grid-verified range for the outer rate ``a1`` of ``phi``.

    Closed form, with ``K = (n-1) h2 coth(h2 R0)``::

        a1 <= (lam - C_hat) / (K + b0)                   (outside B_R0)
        a1 <= (lam - C_hat) / (1/R0 + K + max(-b0, 0))   (inside, with a2 = a1 / (2 R0))
    """
    if not lam > c_hat:
        raise ParameterError(f"need lambda > C_hat, got lambda={lam}, C_hat={c_hat}",
                             "lambda > C_hat", lam=lam, c_hat=c_hat)
    if R0 <= 0 or h2 <= 0:
        raise ParameterError("R0 and h2 must be positive", "R0 > 0, h2 > 0", R0=R0, h2=h2)
    K = (n - 1) * h2 / math.tanh(h2 * R0)
    den_outer = K + b0
    den_inner = 1.0 / R0 + K + max(-b0, 0.0)
    if den_outer <= 0:
        raise ParameterError(
            f"closed-form bound has nonpositive denominator (n-1) h2 coth(h2 R0) + b0 = {den_outer:g}",
            "a1 <= (lambda - C_hat) / ((n-1) h2 coth(h2 R0) + b0)", denominator=den_outer)
    gap = lam - c_hat
    closed_outer, closed_inner = gap / den_outer, gap / den_inner
    r_max = r_max if r_max is not None else max(GRID_R_MAX, 10.0 * R0)

    def ok(a):
        return _phi_min_defect(a, R0, m, drift, lam, r_max, points) >= 0.0

    good = min(closed_outer, closed_inner)
    if not ok(good):
        # the closed form is only a guess when b0 < 0; shrink until verified
        bad = good
        good = bad
        for _ in range(200):
            good *= 0.5
            if ok(good):
                break
        else:
            raise ParameterError("no verified a1 found", "grid defect >= 0")
    else:
        bad = None
        a = good
        while a < 1e6 * max(good, 1.0):
            a *= 1.05
            if ok(a):
                good = a
            else:
                bad = a
                break
    if bad is not None:
        for _ in range(200):
            if bad - good <= 1e-14 * good:
                break
            mid = 0.5 * (good + bad)
            if ok(mid):
                good = mid
            else:
                bad = mid
    out = A1Interval(closed_outer, closed_inner, good, (n - 1) * h2, require_integrable)
    if require_integrable and out.empty:
        raise ParameterError(
            f"integrability a1 > (n-1) h2 = {out.lower:g} conflicts with the verified bound a1 <= {out.upper:g}",
            "a1 > (n-1) h2", lower=out.lower, upper=out.upper)
    return out


def weight_radius(barrier: Barrier, m: ModelManifold) -> float:
    """Radius beyond which ``barrier * psi^{n-1}`` is negligible (below e^-60 of its peak)."""
    return tail_radius(barrier.log_value, m, start=max(1.0, 2.0 * max(barrier.breakpoints(), default=0.0)))


def _normalization(barrier: Barrier, m: ModelManifold, panels: int = 64) -> float:
    R = weight_radius(barrier, m)
    return 1.0 / integrate_radial_log(barrier.log_value, m, R, panels=panels, breakpoints=barrier.breakpoints())


def _gluing_check(phi: PhiBarrier) -> ConstraintCheck:
    R0 = phi.R0
    v_in, v_out = float(phi.inner_value(R0)), float(phi.outer_value(R0))
    d_in, d_out = -2.0 * phi.a2 * R0 * v_in, -phi.a1 * v_out
    err = max(abs(v_in - v_out) / abs(v_out), abs(d_in - d_out) / abs(d_out))
    return ConstraintCheck("c1_gluing", "phi and phi' continuous at R0 (a2 = a1/(2 R0))", None, None,
                           err, err <= 1e-14)


def build_phi(m: ModelManifold, drift: RadialDriftField, lam: float, c_hat: float | None = None,
              h2: float | None = None, R0: float = 1.0, C1: float = 1.0, *,
              a1: float | None = None, points: int = GRID_POINTS) -> PhiBarrier:
    """Build and certify the glued weight ``phi``.

    Without an explicit ``a1`` the rate is the midpoint of the integrable
    part of the verified interval; when that part is empty the largest
    verified rate is used and the barrier is returned without normalization.
    """
    c_hat = drift.bound("c_hat") if c_hat is None else c_hat
    b0 = drift.bound("b0")
    if c_hat is None or b0 is None:
        raise ParameterError("phi needs declared drift bounds b0 and c_hat", "drift bounds declared")
    if h2 is None:
        if m.kind != "hyperbolic":
            raise ParameterError("h2 must be given for non-hyperbolic manifolds", "h2 given")
        h2 = m.parameter
    interval = admissible_a1(lam, c_hat, h2, R0, b0, m.n, False, m, drift, points=points)
    if a1 is None:
        if interval.verified_upper > interval.integrable_lower:
            a1 = 0.5 * (interval.integrable_lower + interval.verified_upper)
        else:
            a1 = interval.verified_upper
    if a1 <= 0:
        raise ParameterError("a1 must be positive", "a1 > 0", a1=a1)
    normalizable = a1 > interval.integrable_lower
    phi = PhiBarrier(a1, R0, C1)
    r_max = max(GRID_R_MAX, 10.0 * R0)
    rel = relative_defects(phi, m, drift, lam, r_max, points)
    checks = [
        ConstraintCheck("lambda_gt_c_hat", "lambda > C_hat", c_hat, None, c_hat - lam, lam > c_hat),
        ConstraintCheck("a1_upper", "a1 <= min{(lambda - C_hat)/(K + b0), (lambda - C_hat)/(1/R0 + K + |b0|_-)}",
                        interval.closed_form, interval.verified_upper,
                        (a1 - interval.verified_upper) / interval.verified_upper,
                        a1 <= interval.verified_upper * (1 + 1e-12)),
        ConstraintCheck("integrability", "a1 > (n-1) h2", interval.integrable_lower, None,
                        interval.integrable_lower - a1, normalizable, required=False,
                        note="" if normalizable else "phi is not integrable; normalization c is absent"),
        _gluing_check(phi),
        _defect_check("defect", "phi'' + (F - b) phi' + (lambda - div b) phi >= 0 off r = R0", rel),
        *_bound_checks(drift, m, ("b0", "c_hat"), r_max),
    ]
    cert = Certificate(tuple(checks), rel.size, float(np.min(rel)), normalizable)
    c = _normalization(phi, m) if normalizable else None
    return PhiBarrier(a1, R0, C1, normalization=c, certificate=cert)


# ---------------------------------------------------------------------------
# eta


def _a1_beta(m: ModelManifold) -> float:
    if m.kind == "euclidean":
        return 0.0
    if m.kind == "ricci_decay":
        return float(m.parameter)
    raise ParameterError(f"{m.kind} manifold does not satisfy a decaying Ricci bound", "A1")


def eta_min_lambda(a: float, c1: float, n: int, sigma: float, c_hat: float) -> float:
    """Smallest ``lambda`` for which ``eta`` is admissible: ``2a[1 + C1(n-1) + sigma] + C_hat``."""
    return 2.0 * a * (1.0 + c1 * (n - 1) + sigma) + c_hat


def build_eta(m: ModelManifold, drift: RadialDriftField, a: float, lam: float, c_hat: float | None = None,
              sigma: float | None = None, *, c1: float | None = None, points: int = GRID_POINTS) -> EtaBarrier:
    """Build, normalize and certify ``eta = exp(-a r^2)``."""
    if not a > 0:
        raise ParameterError(f"eta needs a > 0, got {a}", "a > 0", a=a)
    c_hat = drift.bound("c_hat") if c_hat is None else c_hat
    sigma = drift.bound("sigma") if sigma is None else sigma
    if c_hat is None or sigma is None:
        raise ParameterError("eta needs declared drift bounds sigma and c_hat", "drift bounds declared")
    beta = _a1_beta(m)
    a1_cert = check_curvature_assumptions(m, A1(beta), interval=(1e-3, min(1e4, m.r_limit)))
    c1 = a1_cert.c1_measured if c1 is None else c1
    lam_min = eta_min_lambda(a, c1, m.n, sigma, c_hat)
    if lam < lam_min * (1 - 1e-12):
        raise ParameterError(f"lambda={lam:g} below the admissible minimum {lam_min:.17g}",
                             "lambda >= 2a[1 + C1(n-1) + sigma] + C_hat", lambda_min=lam_min)
    eta = EtaBarrier(a)
    # the weight must be resolved where it is non-negligible
    r_max = max(GRID_R_MAX, math.sqrt(60.0 / a))
    r_max = min(r_max, m.r_limit)
    rel = relative_defects(eta, m, drift, lam, r_max, points)
    checks = [
        ConstraintCheck("lambda_min", "lambda >= 2a[1 + C1(n-1) + sigma] + C_hat", lam_min, None,
                        lam_min - lam, lam >= lam_min * (1 - 1e-12)),
        ConstraintCheck("curvature_A1", "Ric >= -(n-1) beta/(1 + r^2), F >= (n-1)/r", beta, None,
                        a1_cert.max_violation, a1_cert.passed),
        _defect_check("defect", "eta'' + (F - b) eta' + (lambda - div b) eta >= 0", rel),
        *_bound_checks(drift, m, ("sigma", "c_hat"), min(r_max, 1e4)),
    ]
    cert = Certificate(tuple(checks), rel.size, float(np.min(rel)), True)
    return EtaBarrier(a, normalization=_normalization(eta, m), certificate=cert)


# ---------------------------------------------------------------------------
# w


def build_w(m: ModelManifold, drift: RadialDriftField, lam: float, *, a: float | None = None,
            h1: float | None = None, h2: float | None = None, points: int = GRID_POINTS) -> WBarrier:
    """Build and certify the stationary supersolution ``w = exp(-a r)``.

    The admissible rates are the open interval between the roots of
    ``a^2 - sigma a + lambda`` with ``sigma = (n-1) h1 + b1``; the default is
    the vertex ``sigma / 2``.  An explicit ``a`` outside that interval is
    accepted and yields a failing certificate.
    """
    if h1 is None:
        if m.kind != "hyperbolic":
            raise ParameterError("h1 must be given for non-hyperbolic manifolds", "h1 given")
        h1 = m.parameter
    h2 = h1 if h2 is None else h2
    b1 = drift.bound("b1")
    if b1 is None:
        raise ParameterError("w needs a declared lower drift bound b1", "drift bound b1 declared")
    if not b1 > -(m.n - 1) * h1:
        raise ParameterError(f"need b1 > -(n-1) h1 = {-(m.n - 1) * h1:g}, got {b1:g}", "b1 > -(n-1) h1", b1=b1)
    sigma = (m.n - 1) * h1 + b1
    if not (0 < lam < sigma * sigma / 4.0):
        raise ParameterError(f"need 0 < lambda < sigma^2/4 = {sigma * sigma / 4:g}, got {lam:g}",
                             "0 < lambda < sigma^2/4", lam=lam, sigma=sigma)
    a = 0.5 * sigma if a is None else float(a)
    w = WBarrier(a, lam, sigma)
    lo, hi = w.a_roots()
    rel = relative_defects(w, m, drift, lam, GRID_R_MAX, points)
    a0_cert = check_curvature_assumptions(m, A0(h1, h2), interval=(1e-3, GRID_R_MAX))
    curv = max(a0_cert.residuals["sectional_upper"], a0_cert.residuals["mean_curvature_lower"])
    in_range = lo < a < hi
    checks = [
        ConstraintCheck("lambda_range", "0 < lambda < sigma^2/4", sigma * sigma / 4.0, None,
                        lam - sigma * sigma / 4.0, True),
        ConstraintCheck("a_range", "(sigma - sqrt(sigma^2 - 4 lambda))/2 < a < (sigma + sqrt(sigma^2 - 4 lambda))/2",
                        hi, lo, max(lo - a, a - hi), in_range,
                        note="the lower root is enforced as well as the upper root"),
        ConstraintCheck("curvature_A0", "K <= -h1^2 and F >= (n-1) h1 coth(h1 r)", h1, None, curv, curv <= 1e-9),
        _defect_check("defect", "-(w'' + (F + b) w' + lambda w) >= 0", rel),
        *_bound_checks(drift, m, ("b1",), GRID_R_MAX),
    ]
    cert = Certificate(tuple(checks), rel.size, float(np.min(rel)), False)
    return WBarrier(a, lam, sigma, certificate=cert)


# ---------------------------------------------------------------------------
# Gaussian supersolution


def gaussian_constants(n: int, nu: float, p: float, eps: float, t0: float = 1.0) -> tuple[float, float, float]:
    """``(alpha, C, t0)`` for the Gaussian supersolution.

    ``alpha = (n + nu)/2 - eps``; ``C = min(eps^alpha, eps^{1/alpha})`` covers
    both the absorption step (needs ``C <= eps^alpha``) and the
    bound ``C <= eps^{1/alpha}``; ``t0 >= C^{1/alpha}`` keeps the supersolution
    below 1.
    """
    if not (-n < nu <= 0):
        raise ParameterError(f"need -n < nu <= 0, got nu={nu}", "-n < nu <= 0", nu=nu)
    d = n + nu
    p_crit = (d + 2.0) / d  # quotient form: exactly 5/3 for d = 3
    if not p > p_crit:
        raise ParameterError(f"need p > 1 + 2/(n + nu) = {p_crit:.17g}, got p={p}", "p > 1 + 2/(n + nu)",
                             p=p, p_crit=p_crit)
    eps_max = 0.5 * d - 1.0 / (p - 1.0)
    if not (0 < eps < eps_max):
        raise ParameterError(f"need 0 < eps < (n + nu)/2 - 1/(p - 1) = {eps_max:.17g}, got eps={eps}",
                             "0 < eps < (n + nu)/2 - 1/(p - 1)", eps=eps, eps_max=eps_max)
    alpha = 0.5 * d - eps
    C = min(eps ** alpha, eps ** (1.0 / alpha))
    return alpha, C, max(t0, C ** (1.0 / alpha))


def build_gaussian_super(m: ModelManifold, drift: RadialDriftField, p: float, eps: float, t0: float = 1.0, *,
                         t_max: float = 10.0, time_points: int = 41, points: int = GRID_POINTS) -> GaussianSupersolution:
    """Build and certify the Gaussian supersolution on a space-time grid."""
    nu = drift.bound("nu")
    if nu is None:
        raise ParameterError("gaussian_super needs a declared drift bound nu", "drift bound nu declared")
    alpha, C, t0 = gaussian_constants(m.n, nu, p, eps, t0)
    g = GaussianSupersolution(C, alpha, t0, eps, p, nu)
    r = np.concatenate(([0.0], defect_grid(GRID_R_MAX, points)))
    t = np.linspace(0.0, t_max, time_points)
    rel = _relative_parabolic(g, m, drift, r[None, :], t[:, None])
    mean_lo = check_curvature_assumptions(m, A1(0.0), interval=(1e-3, GRID_R_MAX)).residuals["mean_curvature_lower"]
    checks = [
        ConstraintCheck("p_range", "p > 1 + 2/(n + nu)", (m.n + nu + 2.0) / (m.n + nu), None,
                        (m.n + nu + 2.0) / (m.n + nu) - p, True),
        ConstraintCheck("C_bound", "C <= min(eps^alpha, eps^(1/alpha))", min(eps ** alpha, eps ** (1 / alpha)), None,
                        0.0, True),
        ConstraintCheck("sup_le_one", "0 < u <= 1", 1.0, None, g.sup_norm() - 1.0, g.sup_norm() <= 1.0),
        ConstraintCheck("mean_curvature", "F >= (n-1)/r", None, None, mean_lo, mean_lo <= 1e-9),
        _defect_check("defect", "u_t - u'' - (F + b) u' - u^p >= 0", rel.ravel()),
        *_bound_checks(drift, m, ("nu",), GRID_R_MAX),
    ]
    cert = Certificate(tuple(checks), rel.size, float(np.min(rel)), False)
    return GaussianSupersolution(C, alpha, t0, eps, p, nu, certificate=cert)
