"""Radial initial data used by scenarios, mass tests and the solver.

Every datum is a callable of ``r`` and exposes ``extent`` (radius beyond
which it vanishes or is negligible) and ``breakpoints`` (radii where it is
not smooth) so that quadrature panels can be placed sensibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Constant:
    amplitude: float

    extent = math.inf
    breakpoints = ()

    def __call__(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.amplitude)

    def scaled(self, factor: float) -> "Constant":
        return Constant(self.amplitude * factor)

    def to_dict(self) -> dict:
        return {"kind": "constant", "amplitude": self.amplitude}


@dataclass(frozen=True)
class Gaussian:
    """``A exp(-(r / width)^2)``."""

    amplitude: float
    width: float = 1.0

    breakpoints = ()

    @property
    def extent(self) -> float:
        # e^{-80} relative: far below double precision
        return self.width * math.sqrt(80.0)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * np.exp(-(r / self.width) ** 2)

    def scaled(self, factor: float) -> "Gaussian":
        return Gaussian(self.amplitude * factor, self.width)

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "amplitude": self.amplitude, "width": self.width}


@dataclass(frozen=True)
class ConstantOnBall:
    """``A`` on the closed ball of the given radius, zero outside."""

    amplitude: float
    radius: float

    @property
    def extent(self) -> float:
        return self.radius

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.radius,)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, self.amplitude, 0.0)

    def scaled(self, factor: float) -> "ConstantOnBall":
        return ConstantOnBall(self.amplitude * factor, self.radius)

    def to_dict(self) -> dict:
        return {"kind": "constant_on_ball", "amplitude": self.amplitude, "radius": self.radius}


@dataclass(frozen=True)
class BarrierMultiple:
    """``factor * barrier(r)`` for a stationary barrier."""

    barrier: object
    factor: float

    extent = math.inf

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.barrier.breakpoints())

    def __call__(self, r):
        return self.factor * self.barrier.value(np.asarray(r, dtype=float))

    def scaled(self, factor: float) -> "BarrierMultiple":
        return BarrierMultiple(self.barrier, self.factor * factor)

    def to_dict(self) -> dict:
        return {"kind": "barrier_multiple", "family": self.barrier.family, "factor": self.factor}


def validate_datum(u0) -> None:
    amp = getattr(u0, "amplitude", getattr(u0, "factor", 0.0))
    if amp < 0 or not math.isfinite(amp):
        raise ConfigurationError(f"initial datum must be finite and nonnegative, got amplitude {amp!r}")
