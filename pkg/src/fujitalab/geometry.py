"""Rotationally symmetric model manifolds and radial quadrature.

A model manifold is ``[0, inf) x S^{n-1}`` with metric ``dr^2 + psi(r)^2 dtheta^2``.
On radial functions the Laplace-Beltrami operator reduces to

    u'' + F(r) u',    F(r) = (n - 1) psi'(r) / psi(r),

and the volume element is ``omega_{n-1} psi(r)^{n-1} dr``.

Three profiles are built in:

* ``euclidean``    psi(r) = r
* ``hyperbolic``   psi(r) = sinh(h r) / h, constant sectional curvature -h^2
* ``ricci_decay``  psi'' = beta / (1 + r^2) psi, the equality case of the
  radial Ricci lower bound ``Ric >= -(n-1) beta / (1 + r^2)``.  The profile
  has no closed form for general beta and is tabulated from a high-order ODE
  integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly
from scipy.special import gammaln

from .errors import ConfigurationError, DomainError, NumericError

KINDS = ("euclidean", "hyperbolic", "ricci_decay")

# below this radius F is evaluated from the small-r expansion of psi'/psi
ORIGIN_SWITCH = 1e-6

DEFAULT_PANELS = 64
DEFAULT_NODES = 32


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere in R^n, ``2 pi^{n/2} / Gamma(n/2)``."""
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def gamma_exponent(beta_bar: float) -> float:
    """Larger root of ``g (g - 1) = beta_bar``.

    This is the exponent controlling the polynomial volume growth
    ``|S_R| <~ R^{g (n-1)}`` on manifolds with ``Ric >= -(n-1) beta_bar / (1 + r^2)``.
    """
    if beta_bar < 0 or not math.isfinite(beta_bar):
        raise DomainError(f"beta_bar must be finite and >= 0, got {beta_bar!r}")
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * beta_bar))


@dataclass(frozen=True)
class _ProfileTable:
    """Quintic Hermite tables of psi, psi' and psi'' on ``[0, r_max]``."""

    r: np.ndarray
    psi: BPoly
    dpsi: BPoly
    d2psi: BPoly
    r_max: float


def _ricci_decay_table(beta_bar: float, r_max: float, per_decade: int) -> _ProfileTable:
    r_lo = 1e-4
    decades = math.log10(r_max / r_lo)
    grid = np.concatenate(([0.0], np.geomspace(r_lo, r_max, int(math.ceil(decades * per_decade)) + 1)))

    def rhs(r, y):
        return [y[1], beta_bar / (1.0 + r * r) * y[0]]

    sol = solve_ivp(rhs, (0.0, r_max), [0.0, 1.0], method="DOP853", t_eval=grid,
                    rtol=1e-13, atol=1e-30)
    if not sol.success:  # pragma: no cover - DOP853 does not fail on this linear ODE
        raise NumericError(f"profile integration failed: {sol.message}")
    psi, dpsi = sol.y
    # derivatives of the weight w = beta / (1 + r^2) supply the higher Hermite data
    q = 1.0 + grid * grid
    w = beta_bar / q
    w1 = -2.0 * beta_bar * grid / q ** 2
    w2 = beta_bar * (6.0 * grid * grid - 2.0) / q ** 3
    d2psi = w * psi
    d3psi = w * dpsi + w1 * psi
    d4psi = w * d2psi + 2.0 * w1 * dpsi + w2 * psi
    return _ProfileTable(
        grid,
        BPoly.from_derivatives(grid, np.column_stack((psi, dpsi, d2psi))),
        BPoly.from_derivatives(grid, np.column_stack((dpsi, d2psi, d3psi))),
        BPoly.from_derivatives(grid, np.column_stack((d2psi, d3psi, d4psi))),
        float(r_max),
    )


@dataclass(frozen=True)
class ModelManifold:
    """Rotationally symmetric Cartan-Hadamard model of dimension ``n``.

    ``parameter`` is ``h`` for ``hyperbolic`` and ``beta_bar`` for
    ``ricci_decay``; it is ``None`` for ``euclidean``.
    """

    kind: str
    n: int
    parameter: float | None = None
    _table: _ProfileTable | None = field(default=None, repr=False, compare=False)

    # -- profile ---------------------------------------------------------
    def _check_range(self, r: np.ndarray) -> None:
        if self._table is not None and np.any(r > self._table.r_max):
            raise DomainError(
                f"radius {float(np.max(r)):g} beyond the tabulated profile (r_max={self._table.r_max:g})"
            )

    @property
    def r_limit(self) -> float:
        """Largest radius at which the profile can be evaluated."""
        return math.inf if self._table is None else self._table.r_max

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return r.copy()
        if self.kind == "hyperbolic":
            h = self.parameter
            return np.sinh(h * r) / h
        self._check_range(r)
        return self._table.psi(r)

    def dpsi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return np.ones_like(r)
        if self.kind == "hyperbolic":
            return np.cosh(self.parameter * r)
        self._check_range(r)
        return self._table.dpsi(r)

    def d2psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            return self.parameter * np.sinh(self.parameter * r)
        self._check_range(r)
        return self._table.d2psi(r)

    def log_psi(self, r):
        """``log psi(r)``, finite where ``psi`` itself would overflow."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            if self.kind == "euclidean":
                return np.log(r)
            if self.kind == "hyperbolic":
                x = self.parameter * r
                big = x > 20.0
                small = np.log(np.sinh(np.where(big, 1.0, x)) / self.parameter)
                large = x - math.log(2.0 * self.parameter) + np.log1p(-np.exp(-2.0 * np.where(big, x, 20.0)))
                return np.where(big, large, small)
            return np.log(self.psi(r))

    def curvature_ratio(self, r):
        """``psi''(r) / psi(r)``, i.e. minus the radial sectional curvature."""
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            return np.full_like(r, self.parameter ** 2)
        return self.d2psi(r) / self.psi(r)

    def sectional_curvature(self, r):
        return -self.curvature_ratio(r)

    def radial_ricci(self, r):
        return -(self.n - 1) * self.curvature_ratio(r)

    # -- Laplacian coefficient and measure -------------------------------
    def mean_curvature(self, r):
        """``F(r) = (n - 1) psi'(r) / psi(r)`` for ``r > 0``."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("mean curvature is only defined for r > 0; use origin_rF() at the pole")
        k = self.n - 1
        if self.kind == "euclidean":
            return k / r
        if self.kind == "hyperbolic":
            h = self.parameter
            return k * h / np.tanh(h * r)
        near = r < ORIGIN_SWITCH
        rr = np.where(near, ORIGIN_SWITCH, r)
        far_val = k * self.dpsi(rr) / self.psi(rr)
        if not np.any(near):
            return far_val
        rs = np.where(near, r, ORIGIN_SWITCH)
        # psi'/psi = 1/r + (psi''/psi) r / 3 + O(r^3) for odd profiles
        near_val = k * (1.0 / rs + self.curvature_ratio(rs) * rs / 3.0)
        return np.where(near, near_val, far_val)

    def origin_rF(self) -> float:
        """Limit of ``r F(r)`` as ``r -> 0+``; equals ``n - 1`` for every profile."""
        return float(self.n - 1)

    def surface_area(self, R):
        """Area of the geodesic sphere ``S_R``, ``omega_{n-1} psi(R)^{n-1}``."""
        return sphere_area(self.n) * np.exp((self.n - 1) * self.log_psi(R))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.kind == "hyperbolic":
            out["h"] = self.parameter
        elif self.kind == "ricci_decay":
            out["beta_bar"] = self.parameter
        return out


def make_model_manifold(kind: str, n: int, parameter: float | None = None, *,
                        table_r_max: float = 1e6, per_decade: int = 250) -> ModelManifold:
    """Build a model manifold.

    Parameters
    ----------
    kind : {"euclidean", "hyperbolic", "ricci_decay"}
    n : int
        Dimension, at least 2.
    parameter : float, optional
        ``h > 0`` for hyperbolic space, ``beta_bar > 0`` for ``ricci_decay``.
    table_r_max, per_decade
        Extent and density of the log-spaced profile table (``ricci_decay`` only).
    """
    if kind not in KINDS:
        raise ConfigurationError(f"unknown manifold kind {kind!r}; expected one of {KINDS}")
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ConfigurationError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    if kind == "euclidean":
        return ModelManifold("euclidean", n)
    if parameter is None or not math.isfinite(parameter) or parameter <= 0:
        name = "h" if kind == "hyperbolic" else "beta_bar"
        raise ConfigurationError(f"{kind} manifold needs {name} > 0, got {parameter!r}")
    parameter = float(parameter)
    if kind == "hyperbolic":
        return ModelManifold("hyperbolic", n, parameter)
    table = _ricci_decay_table(parameter, float(table_r_max), per_decade)
    return ModelManifold("ricci_decay", n, parameter, table)


def mean_curvature_F(m: ModelManifold, r):
    """Radial coefficient of the Laplace-Beltrami operator at ``r > 0``."""
    return m.mean_curvature(r)


# ---------------------------------------------------------------------------
# curvature assumptions


@dataclass(frozen=True)
class A0:
    """Pinched negative curvature: ``K <= -h1^2`` and ``Ric >= -(n-1) h2^2``."""

    h1: float
    h2: float

    @property
    def label(self) -> str:
        return f"A0(h1={self.h1:g}, h2={self.h2:g})"


@dataclass(frozen=True)
class A1:
    """Decaying Ricci bound ``Ric >= -(n-1) beta_bar / (1 + r^2)``."""

    beta_bar: float

    @property
    def label(self) -> str:
        return f"A1(beta_bar={self.beta_bar:g})"


Assumption = Union[A0, A1]


@dataclass(frozen=True)
class AssumptionCertificate:
    """Grid check of a curvature assumption.

    ``max_violation`` is the largest relative residual over all checked
    inequalities (negative means strict satisfaction everywhere).  The check
    passes when it does not exceed ``tolerance``.
    """

    assumption: Assumption
    checked_interval: tuple[float, float]
    max_violation: float
    grid_points: int
    tolerance: float
    residuals: dict[str, float]
    c1_measured: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "assumption": self.assumption.label,
            "checked_interval": list(self.checked_interval),
            "max_violation": self.max_violation,
            "grid_points": self.grid_points,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
            "c1_measured": self.c1_measured,
            "passed": self.passed,
        }


def _rel(excess, scale):
    return np.max(excess / np.maximum(np.abs(scale), 1e-300))


def measured_c1(m: ModelManifold, interval: tuple[float, float] = (1e-3, 1e4), grid_points: int = 4096) -> float:
    """``max r F(r) / (n - 1)`` over a log grid: the constant in ``F <= C1 (n-1) / r``."""
    r_min, r_max = interval
    r = np.geomspace(r_min, min(r_max, m.r_limit), grid_points)
    return float(np.max(r * m.mean_curvature(r)) / (m.n - 1))


def check_curvature_assumptions(m: ModelManifold, target: Assumption,
                                interval: tuple[float, float] = (1e-3, 1e3),
                                grid_points: int = 2048,
                                tolerance: float = 1e-9) -> AssumptionCertificate:
    """Check a curvature assumption and its mean-curvature consequences on a grid.

    For ``A0(h1, h2)``: ``K <= -h1^2``, ``Ric >= -(n-1) h2^2`` and
    ``(n-1) h1 coth(h1 r) <= F <= (n-1) h2 coth(h2 r)``.
    For ``A1(beta_bar)``: the Ricci bound and ``F >= (n-1)/r``; the upper
    constant ``C1`` is measured and reported rather than assumed.
    """
    r_min, r_max = interval
    if not (0 < r_min < r_max):
        raise DomainError(f"need 0 < r_min < r_max, got {interval}")
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    r_max = min(r_max, m.r_limit)
    r = np.geomspace(r_min, r_max, grid_points)
    k = m.n - 1
    ratio = m.curvature_ratio(r)
    K = -ratio
    ric = -k * ratio
    F = m.mean_curvature(r)
    res: dict[str, float] = {}
    if isinstance(target, A0):
        h1, h2 = target.h1, target.h2
        if h1 <= 0 or h2 < h1:
            raise DomainError(f"A0 needs 0 < h1 <= h2, got h1={h1}, h2={h2}")
        res["sectional_upper"] = float(_rel(K + h1 ** 2, h1 ** 2))
        res["ricci_lower"] = float(_rel(-k * h2 ** 2 - ric, k * h2 ** 2))
        lo = k * h1 / np.tanh(h1 * r)
        hi = k * h2 / np.tanh(h2 * r)
        res["mean_curvature_lower"] = float(_rel(lo - F, lo))
        res["mean_curvature_upper"] = float(_rel(F - hi, hi))
    elif isinstance(target, A1):
        beta = target.beta_bar
        if beta < 0:
            raise DomainError(f"A1 needs beta_bar >= 0, got {beta}")
        bound = -k * beta / (1.0 + r * r)
        scale = np.maximum(-bound, k * 1e-300)
        # relative residual against the bound; absolute when beta_bar == 0
        res["ricci_lower"] = float(np.max((bound - ric) / np.where(beta > 0, scale, 1.0)))
        lo = k / r
        res["mean_curvature_lower"] = float(_rel(lo - F, lo))
    else:
        raise DomainError(f"unknown assumption {target!r}")
    c1 = float(np.max(r * F) / k)
    return AssumptionCertificate(target, (float(r_min), float(r_max)), max(res.values()),
                                 grid_points, tolerance, res, c1)


# ---------------------------------------------------------------------------
# quadrature


def _panel_edges(r_max: float, panels: int, breakpoints: Sequence[float]) -> np.ndarray:
    edges = np.linspace(0.0, r_max, panels + 1)
    extra = [b for b in breakpoints if 0.0 < b < r_max]
    if extra:
        edges = np.unique(np.concatenate((edges, extra)))
    return edges


def radial_nodes(m: ModelManifold, r_max: float, *, panels: int = DEFAULT_PANELS,
                 nodes: int = DEFAULT_NODES, breakpoints: Sequence[float] = ()):
    """Composite Gauss-Legendre nodes on ``[0, r_max]`` for the model's volume.

    Returns ``(r, w, log_density)`` such that
    ``int_M f dmu ~= sum(w * f(r) * exp(log_density))``.  Keeping the density
    in log form lets callers combine it with rapidly decaying integrands
    without overflow.
    """
    if not (r_max > 0) or not math.isfinite(r_max):
        raise DomainError(f"r_max must be positive and finite, got {r_max!r}")
    if panels < 1 or nodes < 1:
        raise DomainError("panels and nodes must be >= 1")
    x, wx = np.polynomial.legendre.leggauss(nodes)
    edges = _panel_edges(float(r_max), int(panels), breakpoints)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    r = (half * x[None, :] + 0.5 * (a + b)).ravel()
    w = (half * wx[None, :]).ravel() * sphere_area(m.n)
    return r, w, (m.n - 1) * m.log_psi(r)


def integrate_radial(f: Callable[[np.ndarray], np.ndarray], m: ModelManifold, r_max: float, *,
                     panels: int = DEFAULT_PANELS, nodes: int = DEFAULT_NODES,
                     breakpoints: Sequence[float] = ()) -> float:
    """Integrate a radial function over the geodesic ball ``B_{r_max}``.

    ``f`` is called once with the array of quadrature radii.  A non-finite
    sample raises :class:`NumericError` naming the first offending radius.
    """
    r, w, logd = radial_nodes(m, r_max, panels=panels, nodes=nodes, breakpoints=breakpoints)
    vals = np.asarray(f(r), dtype=float)
    if vals.shape != r.shape:
        vals = np.broadcast_to(vals, r.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        r_bad = float(r[np.argmax(bad)])
        raise NumericError(f"integrand is not finite at r={r_bad:.17g}", radius=r_bad)
    dens = np.exp(logd)
    with np.errstate(invalid="ignore"):
        terms = np.where(vals == 0.0, 0.0, vals * dens)
    return float(np.sum(w * terms))


def integrate_radial_log(log_f: Callable[[np.ndarray], np.ndarray], m: ModelManifold, r_max: float, *,
                         panels: int = DEFAULT_PANELS, nodes: int = DEFAULT_NODES,
                         breakpoints: Sequence[float] = ()) -> float:
    """Same as :func:`integrate_radial` for a positive integrand given by its logarithm."""
    r, w, logd = radial_nodes(m, r_max, panels=panels, nodes=nodes, breakpoints=breakpoints)
    lf = np.asarray(log_f(r), dtype=float)
    if np.any(np.isnan(lf)) or np.any(lf == np.inf):
        r_bad = float(r[np.argmax(np.isnan(lf) | (lf == np.inf))])
        raise NumericError(f"log-integrand is not finite at r={r_bad:.17g}", radius=r_bad)
    return float(np.sum(w * np.exp(lf + logd)))


def tail_radius(log_f: Callable[[np.ndarray], np.ndarray], m: ModelManifold, *,
                drop: float = 60.0, start: float = 1.0) -> float:
    """Radius beyond which ``f psi^{n-1}`` stays ``e^{-drop}`` below its peak.

    Intended for integrands that eventually decay monotonically (all
    barrier weights do).  Found by doubling; capped at the profile's range.
    """
    limit = m.r_limit
    R = start
    while True:
        r = np.linspace(0.0, R, 2049)[1:]
        g = np.asarray(log_f(r), dtype=float) + (m.n - 1) * m.log_psi(r)
        peak = np.max(g)
        if g[-1] < peak - drop and np.all(np.diff(g[-64:]) <= 0):
            return float(R)
        if R >= limit:
            return float(limit)
        R = min(2.0 * R, limit)
