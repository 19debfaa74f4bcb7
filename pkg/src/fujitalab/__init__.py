"""Barrier certificates, blow-up criteria and a radial solver for the semilinear
heat equation with drift on rotationally symmetric Cartan-Hadamard models."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, FujitaLabError, NumericError, ParameterError,  # noqa: E402
                     SchemaError, UsageError)
from .geometry import ModelManifold, make_model_manifold  # noqa: E402
from .drift import RadialDriftField, make_drift  # noqa: E402

__all__ = [
    "ConfigurationError", "DomainError", "FujitaLabError", "NumericError", "ParameterError", "SchemaError",
    "UsageError", "ModelManifold", "make_model_manifold", "RadialDriftField", "make_drift", "__version__",
]
