"""Blow-up thresholds, exponent ranges and the global-existence envelope.

The blow-up side is a Kaplan-type argument: the weighted mean
``y(t) = c * int u(t) phi dmu`` of a solution satisfies ``y' >= y^p - lambda y``,
so it must explode once ``y(0) > lambda^{1/(p-1)}``.  The existence side
builds the explicit supersolution ``e^{-lambda t} xi(t) C w(r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .barriers import (Barrier, EtaBarrier, WBarrier, build_eta, eta_min_lambda, weight_radius,
                       _relative_stationary)
from .drift import RadialDriftField, make_drift
from .errors import DomainError, ParameterError, UsageError
from .geometry import ModelManifold, integrate_radial

# relative slack below which mass and threshold are treated as equal
MASS_RTOL = 1e-12


def kaplan_threshold(lam: float, p: float) -> float:
    """``lambda^{1/(p-1)}``, the critical weighted mass."""
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    if lam < 0:
        raise DomainError(f"need lambda >= 0, got {lam}")
    return lam ** (1.0 / (p - 1.0))


@dataclass(frozen=True)
class KaplanVerdict:
    mass: float
    threshold: float
    predicts_blowup: bool
    ode_blowup_time: float
    lam: float
    p: float

    def to_dict(self) -> dict:
        return {
            "mass": self.mass,
            "threshold": self.threshold,
            "predicts_blowup": self.predicts_blowup,
            "ode_blowup_time": None if math.isinf(self.ode_blowup_time) else self.ode_blowup_time,
            "parameters": {"lambda": self.lam, "p": self.p},
        }


def weighted_mass(u0, barrier: Barrier, m: ModelManifold, r_max: float | None = None) -> float:
    """``normalization * int u0 * barrier dmu``."""
    if barrier.normalization is None:
        raise UsageError(f"{barrier.family} barrier carries no normalization")
    R = weight_radius(barrier, m)
    if r_max is not None:
        R = min(R, r_max)
    R = min(R, getattr(u0, "extent", math.inf))
    bps = tuple(barrier.breakpoints()) + tuple(getattr(u0, "breakpoints", ()))
    integral = integrate_radial(lambda r: u0(r) * barrier.value(r), m, R, breakpoints=bps)
    return barrier.normalization * integral


def mass_test(u0, barrier: Barrier, m: ModelManifold, lam: float, p: float,
              r_max: float | None = None) -> KaplanVerdict:
    """Compare the weighted mean of ``u0`` against ``lambda^{1/(p-1)}``.

    The comparison is strict; masses within ``MASS_RTOL`` of the threshold
    (quadrature round-off) count as not exceeding it.
    """
    mass = weighted_mass(u0, barrier, m, r_max)
    thr = kaplan_threshold(lam, p)
    blow = mass > thr * (1.0 + MASS_RTOL)
    return KaplanVerdict(mass, thr, bool(blow), ode_blowup_time(mass, lam, p) if mass > 0 else math.inf, lam, p)


def ode_blowup_time(mass0: float, lam: float, p: float) -> float:
    """Blow-up time of ``y' = y^p - lambda y``, ``y(0) = mass0``; ``inf`` at or below threshold."""
    if not mass0 > 0:
        raise DomainError(f"need mass0 > 0, got {mass0}")
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    if lam == 0:
        return mass0 ** (1.0 - p) / (p - 1.0)
    x = lam * mass0 ** (1.0 - p)
    if x >= 1.0:
        return math.inf
    return -math.log1p(-x) / ((p - 1.0) * lam)


def ode_blowup_time_numeric(mass0: float, lam: float, p: float, *, rtol: float = 1e-10,
                            growth: float = 30.0) -> float:
    """Blow-up time of ``y' = y^p - lambda y`` by adaptive Runge-Kutta integration.

    With ``s = log y`` the ODE reads ``s' = e^{(p-1)s} - lambda``; its inverse
    ``dt/ds = 1 / (e^{(p-1)s} - lambda)`` is integrated with RK45 from
    ``log mass0`` until ``y^{p-1}`` has grown by ``e^growth``.  The remaining
    time is the tail series ``e^{-(p-1)s}/(p-1) + lambda e^{-2(p-1)s}/(2(p-1))``.
    Independent of the closed form.
    """
    k = p - 1.0
    s0 = math.log(mass0)
    if lam > 0 and k * s0 <= math.log(lam):
        return math.inf
    s1 = s0 + growth / k
    if lam > 0:
        log_lam = math.log(lam)

        def rhs(s, t):
            return [1.0 / (lam * math.expm1(k * s - log_lam))]
    else:
        def rhs(s, t):
            return [math.exp(-k * s)]

    sol = solve_ivp(rhs, (s0, s1), [0.0], method="RK45", rtol=rtol, atol=1e-14)
    e = math.exp(-k * s1)
    return float(sol.y[0, -1]) + e / k + lam * e * e / (2.0 * k)


# ---------------------------------------------------------------------------
# exponents


@dataclass(frozen=True)
class ExponentRanges:
    """Exponent bounds for a given geometry and drift.

    ``fujita_nonexistence_upper``: every nontrivial solution blows up for
    ``1 < p`` below this value.  ``existence_lower``: small data give global
    solutions for ``p`` above this value.
    """

    n: int
    gamma: float
    nu: float
    fujita_nonexistence_upper: float
    existence_lower: float

    @property
    def euclidean_consistent(self) -> bool:
        return self.gamma == 1 and self.nu == 0

    def to_dict(self) -> dict:
        return {"n": self.n, "gamma": self.gamma, "nu": self.nu,
                "fujita_nonexistence_upper": self.fujita_nonexistence_upper,
                "existence_lower": self.existence_lower,
                "euclidean_consistent": self.euclidean_consistent}


def exponent_ranges(n: int, gamma: float, nu: float = 0.0) -> ExponentRanges:
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if gamma < 1:
        raise DomainError(f"need gamma >= 1, got {gamma}")
    if not (-n < nu <= 0):
        raise DomainError(f"need -n < nu <= 0, got {nu}")
    # written as single quotients so that gamma = 1, nu = 0 gives the same double 5/3-style value
    g = gamma * (n - 1) + 1.0
    d = n + nu
    return ExponentRanges(n, gamma, nu, (g + 2.0) / g, (d + 2.0) / d)


# ---------------------------------------------------------------------------
# small-a search


@dataclass(frozen=True)
class SmallAResult:
    status: str  # "blowup" or "inconclusive"
    a: float | None
    lam: float | None
    verdict: KaplanVerdict | None
    iterations: int
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "blowup"

    def to_dict(self) -> dict:
        return {"status": self.status, "a": self.a, "lambda": self.lam, "iterations": self.iterations,
                "reason": self.reason, "verdict": None if self.verdict is None else self.verdict.to_dict()}


def find_small_a(u0, m: ModelManifold, sigma_drift: float, c_hat: float, c1: float, p: float, n: int,
                 gamma: float, drift: RadialDriftField | None = None, *, a_start: float = 1.0,
                 a_min: float = 1e-12) -> SmallAResult:
    """Halve ``a`` until the Gaussian-weighted mass of ``u0`` exceeds the threshold.

    ``lambda`` is tied to ``a`` by ``lambda = 2a[1 + C1(n-1) + sigma]``, for
    which the weight ``exp(-a r^2)`` is admissible.  The mass decays like
    ``a^{(gamma(n-1)+1)/2}`` and the threshold like ``a^{1/(p-1)}``, so the
    search succeeds for small ``a`` whenever ``p < 1 + 2/(gamma(n-1)+1)``.
    Failure is reported as inconclusive, never as global existence.
    """
    if c_hat != 0:
        raise ParameterError("the small-a argument needs C_hat = 0", "C_hat = 0", c_hat=c_hat)
    if n != m.n:
        raise DomainError(f"dimension mismatch: n={n}, manifold n={m.n}")
    probe = np.asarray(u0(np.linspace(0.0, 50.0, 5001)), dtype=float)
    if np.any(probe < 0):
        raise DomainError("initial datum must be nonnegative")
    if not np.any(probe > 0):
        raise DomainError("initial datum vanishes identically")
    drift = drift if drift is not None else make_drift("none")
    a = a_start
    it = 0
    while a >= a_min:
        it += 1
        if math.sqrt(60.0 / a) > m.r_limit:
            return SmallAResult("inconclusive", None, None, None, it, "profile table too short for smaller a")
        lam = eta_min_lambda(a, c1, n, sigma_drift, 0.0)
        eta = build_eta(m, drift, a, lam, c_hat=0.0, sigma=sigma_drift, c1=c1)
        verdict = mass_test(u0, eta, m, lam, p)
        if verdict.predicts_blowup:
            return SmallAResult("blowup", a, lam, verdict, it)
        a *= 0.5
    return SmallAResult("inconclusive", None, None, None, it, f"no crossing for a >= {a_min:g}")


# ---------------------------------------------------------------------------
# envelope


@dataclass(frozen=True)
class Envelope:
    """``u_bar(r, t) = exp(-lambda t) xi(t) C w(r)`` with ``xi' = C^{p-1} e^{-(p-1) lambda t} xi^p``, ``xi(0) = 1``."""

    lam: float
    p: float
    c_tilde: float
    w: WBarrier

    @property
    def w_sup(self) -> float:
        return self.c_tilde * self.w.sup_norm()

    def xi(self, t):
        t = np.asarray(t, dtype=float)
        k = self.p - 1.0
        q = self.w_sup ** k / self.lam
        return (1.0 - q * (-np.expm1(-k * self.lam * t))) ** (-1.0 / k)

    @property
    def xi_inf(self) -> float:
        k = self.p - 1.0
        return (1.0 - self.w_sup ** k / self.lam) ** (-1.0 / k)

    def value(self, r, t):
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.exp(-self.lam * t) * self.xi(t) * self.c_tilde * self.w.value(r)

    def supersolution_defect(self, m: ModelManifold, drift: RadialDriftField, r, t):
        """``u_t - u'' - (F + b) u' - u^p`` at ``r > 0``; nonnegative for a certified ``w``."""
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        k = self.p - 1.0
        u = self.value(r, t)
        xi = self.xi(t)
        growth = self.w_sup ** k * np.exp(-k * self.lam * t) * xi ** k
        # -(w'' + (F + b) w')/w = stationary defect + lambda
        lin = _relative_stationary(self.w, m, drift, self.w.lam, r) + self.w.lam
        return u * (-self.lam + growth + lin) - u ** self.p

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "p": self.p, "c_tilde": self.c_tilde, "w_sup": self.w_sup,
                "xi_inf": self.xi_inf, "w": self.w.to_dict()}


def envelope(lam: float, p: float, c_tilde: float, w: WBarrier) -> Envelope:
    """Global supersolution built from ``w``; requires ``0 < C < lambda^{1/(p-1)} / sup w``."""
    if not isinstance(w, WBarrier):
        raise UsageError("envelope needs a w barrier")
    bound = kaplan_threshold(lam, p) / w.sup_norm()
    if not (0 < c_tilde < bound):
        raise ParameterError(f"need 0 < C_tilde < lambda^(1/(p-1))/sup w = {bound:.17g}, got {c_tilde!r}",
                             "0 < C_tilde < lambda^(1/(p-1)) / sup w", c_tilde=c_tilde, bound=bound)
    return Envelope(float(lam), float(p), float(c_tilde), w)
