"""Radial drift fields ``b = b(r) d/dr`` on model manifolds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, DomainError
from .geometry import ModelManifold

KINDS = ("none", "constant_radial", "inverse_r", "sampled")
BOUND_NAMES = ("b0", "b1", "sigma", "nu", "c_hat")


@dataclass(frozen=True)
class DriftBounds:
    """Declared constants bounding the drift.

    b0     global lower bound of the radial component
    b1     lower bound used by the exponential supersolution (must exceed -(n-1) h1)
    sigma  constant in ``b >= -sigma / r``
    nu     constant in ``b >= nu / r``
    c_hat  upper bound of ``div b``
    """

    b0: float | None = None
    b1: float | None = None
    sigma: float | None = None
    nu: float | None = None
    c_hat: float | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in BOUND_NAMES if getattr(self, k) is not None}


@dataclass(frozen=True)
class BoundCheck:
    name: str
    declared: float
    worst: float
    passed: bool

    def to_dict(self) -> dict:
        return {"bound": self.name, "declared": self.declared, "worst": self.worst, "passed": self.passed}


@dataclass(frozen=True)
class RadialDriftField:
    """Radial component ``b(r)`` of a drift field and its declared bounds.

    ``parameter`` is ``b1`` for ``constant_radial`` and ``nu`` for
    ``inverse_r`` (``b = nu / r``).  ``sampled`` drifts interpolate a table
    with a natural cubic spline.
    """

    kind: str = "none"
    parameter: float = 0.0
    declared: DriftBounds = field(default_factory=DriftBounds)
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    def b(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "none":
            return np.zeros_like(r)
        if self.kind == "constant_radial":
            return np.full_like(r, self.parameter)
        if self.kind == "inverse_r":
            with np.errstate(divide="ignore"):
                return self.parameter / r
        return self._sampled(r, 0)

    def db(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind in ("none", "constant_radial"):
            return np.zeros_like(r)
        if self.kind == "inverse_r":
            with np.errstate(divide="ignore"):
                return -self.parameter / (r * r)
        return self._sampled(r, 1)

    def _sampled(self, r, nu):
        x = self._spline.x
        # constant extension beyond the table
        rc = np.clip(r, x[0], x[-1])
        out = self._spline(rc, nu)
        if nu:
            out = np.where((r < x[0]) | (r > x[-1]), 0.0, out)
        return out

    def divergence(self, m: ModelManifold, r):
        """``div b = b' + F b`` for the radial field ``b d/dr``."""
        r = np.asarray(r, dtype=float)
        return self.db(r) + m.mean_curvature(r) * self.b(r)

    def origin_rb(self) -> float:
        """``lim_{r->0+} r b(r)``."""
        return float(self.parameter) if self.kind == "inverse_r" else 0.0

    def origin_divergence(self, m: ModelManifold) -> float:
        """``lim_{r->0+} div b``, possibly infinite."""
        if self.kind == "none":
            return 0.0
        if self.kind == "constant_radial":
            return math.copysign(math.inf, self.parameter) if self.parameter else 0.0
        if self.kind == "inverse_r":
            c = (m.n - 2) * self.parameter
            return 0.0 if c == 0 else math.copysign(math.inf, c)
        b0 = float(self._spline(self._spline.x[0]))
        if b0 != 0.0:
            return math.copysign(math.inf, b0)
        return float(m.n * self._spline(self._spline.x[0], 1))

    def effective_dimension(self, m: ModelManifold) -> float:
        """``1 + lim r (F + b)`` at the pole: ``n`` plus the inverse-r strength."""
        return 1.0 + m.origin_rF() + self.origin_rb()

    # -- declared bounds ----------------------------------------------------
    def bound(self, name: str) -> float | None:
        """Declared bound, falling back to the exact value for the analytic kinds."""
        v = getattr(self.declared, name)
        if v is not None:
            return v
        if self.kind == "none":
            return 0.0
        if self.kind == "constant_radial":
            if name in ("b0", "b1"):
                return float(self.parameter)
            # div b = F b1 <= 0 when b1 <= 0; unbounded near the pole otherwise
            if name == "c_hat" and self.parameter <= 0:
                return 0.0
        if self.kind == "inverse_r":
            if name == "nu":
                return float(self.parameter)
            if name == "sigma":
                return max(0.0, -float(self.parameter))
            # div(nu/r d/dr) = (nu/r)(F - 1/r) <= 0 for nu <= 0 since F >= (n-1)/r
            if name == "c_hat" and self.parameter <= 0:
                return 0.0
        return None

    def check_bounds(self, m: ModelManifold, interval: tuple[float, float] = (1e-4, 100.0),
                     grid_points: int = 4096, rtol: float = 1e-12) -> list[BoundCheck]:
        """Re-check every available bound on a log grid."""
        r = np.geomspace(*interval, grid_points)
        b = self.b(r)
        out = []
        for name in BOUND_NAMES:
            v = self.bound(name)
            if v is None:
                continue
            if name in ("b0", "b1"):
                worst = float(np.min(b))
                ok = worst >= v - rtol * max(1.0, abs(v))
            elif name == "sigma":
                worst = float(np.min(r * b))
                ok = worst >= -v - rtol * max(1.0, abs(v))
            elif name == "nu":
                worst = float(np.min(r * b))
                ok = worst >= v - rtol * max(1.0, abs(v))
            else:
                worst = float(np.max(self.divergence(m, r)))
                ok = worst <= v + rtol * max(1.0, abs(v))
            out.append(BoundCheck(name, float(v), worst, bool(ok)))
        return out

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "constant_radial":
            out["b1"] = self.parameter
        elif self.kind == "inverse_r":
            out["nu"] = self.parameter
        elif self.kind == "sampled":
            out["r"] = self._spline.x.tolist()
            out["b"] = self._spline(self._spline.x).tolist()
        if self.declared.to_dict():
            out["bounds"] = self.declared.to_dict()
        return out


def make_drift(kind: str = "none", parameter: float | None = None, *, table=None,
               bounds: DriftBounds | dict | None = None) -> RadialDriftField:
    """Build a radial drift field.

    ``table`` is a pair ``(r, b)`` of increasing radii and values for
    ``sampled`` drifts.
    """
    if isinstance(bounds, dict):
        unknown = set(bounds) - set(BOUND_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown drift bound(s): {sorted(unknown)}")
        bounds = DriftBounds(**bounds)
    bounds = bounds or DriftBounds()
    if kind not in KINDS:
        raise ConfigurationError(f"unknown drift kind {kind!r}; expected one of {KINDS}")
    if kind == "none":
        return RadialDriftField("none", 0.0, bounds)
    if kind in ("constant_radial", "inverse_r"):
        if parameter is None or not math.isfinite(parameter):
            raise ConfigurationError(f"{kind} drift needs a finite parameter")
        return RadialDriftField(kind, float(parameter), bounds)
    if table is None:
        raise ConfigurationError("sampled drift needs a (r, b) table")
    r, b = (np.asarray(a, dtype=float) for a in table)
    if r.ndim != 1 or r.shape != b.shape or r.size < 4:
        raise ConfigurationError("sampled drift table needs matching 1-D arrays of >= 4 points")
    if np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ConfigurationError("sampled drift radii must be nonnegative and increasing")
    if not np.all(np.isfinite(b)):
        raise DomainError("sampled drift values must be finite")
    return RadialDriftField("sampled", 0.0, bounds, CubicSpline(r, b, bc_type="natural"))
