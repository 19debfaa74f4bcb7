"""Scenario files: JSON schema, validation and object construction.

A scenario is a JSON object with ``"schema_version": 1``.  Unknown keys are
rejected at every level so that typos surface as schema errors instead of
silently falling back to defaults.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import jsonschema

from .drift import RadialDriftField, make_drift
from .errors import SchemaError
from .geometry import ModelManifold, make_model_manifold
from .initial_data import ConstantOnBall, Gaussian
from .solver import SolverConfig

SCHEMA_VERSION = 1
THEOREM_TAGS = ("thm_3_2", "thm_4_2", "thm_5_2", "cor_5_3", "thm_6_2", "freeform")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}


def _obj(props: dict, required=(), **extra) -> dict:
    out = {"type": "object", "properties": props, "additionalProperties": False}
    if required:
        out["required"] = list(required)
    out.update(extra)
    return out


_bounds = _obj({k: _num for k in ("b0", "b1", "sigma", "nu", "c_hat")})

SCHEMA: dict = _obj({
    "schema_version": {"const": SCHEMA_VERSION},
    "name": {"type": "string"},
    "theorem_tag": {"enum": list(THEOREM_TAGS)},
    "seed": {"type": "integer"},
    "manifold": _obj({
        "kind": {"enum": ["euclidean", "hyperbolic", "ricci_decay"]},
        "n": {"type": "integer", "minimum": 2},
        "h": _pos,
        "beta_bar": _pos,
    }, ["kind", "n"]),
    "drift": _obj({
        "kind": {"enum": ["none", "constant_radial", "inverse_r", "sampled"]},
        "b1": _num,
        "nu": _num,
        "r": {"type": "array", "items": _num},
        "b": {"type": "array", "items": _num},
        "bounds": _bounds,
    }, ["kind"]),
    "p": {"type": "number", "exclusiveMinimum": 1},
    "initial_datum": {"oneOf": [
        _obj({"kind": {"const": "gaussian"}, "amplitude": {"type": "number", "minimum": 0}, "width": _pos},
             ["kind", "amplitude"]),
        _obj({"kind": {"const": "barrier_multiple"}, "family": {"enum": ["phi", "eta", "w"]},
              "factor": {"type": "number", "minimum": 0}, "fraction_of_c_tilde": _pos},
             ["kind", "family"]),
        _obj({"kind": {"const": "constant_on_ball"}, "amplitude": {"type": "number", "minimum": 0},
              "mass_factor": _pos, "radius": _pos}, ["kind", "radius"]),
    ]},
    "barriers": _obj({
        "phi": _obj({"lambda": _pos, "R0": _pos, "C1": _pos, "a1": _pos, "c_hat": _num, "h2": _pos},
                    ["lambda"]),
        "eta": _obj({"lambda": _pos, "a": _pos, "c_hat": _num, "sigma": _num, "c1": _pos}, ["a"]),
        "w": _obj({"lambda": _pos, "a": _pos, "h1": _pos, "h2": _pos, "c_tilde": _pos,
                   "c_tilde_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
                  ["lambda"]),
        "gaussian_super": _obj({"eps": _pos, "t0": _pos}, ["eps"]),
    }),
    "solver": _obj({
        "r_max": _pos,
        "n_grid": {"type": "integer", "minimum": 16},
        "t_end": _pos,
        "u_cap": {"type": "number", "exclusiveMinimum": 1},
        "dt_min": _pos,
        "safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "scheme": {"enum": ["imex_be", "imex_cn"]},
        "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "snapshot_every": _pos,
        "dt_max": _pos,
        "grading": {"type": "number", "minimum": 0},
    }, ["r_max", "n_grid", "t_end"]),
    "sweep": _obj({
        "p": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 1}, "minItems": 1},
        "amplitude": {"type": "array", "items": _pos, "minItems": 1},
        "small_a": {"type": "boolean"},
    }, ["p", "amplitude"]),
}, ["schema_version", "name", "manifold", "p", "initial_datum"])


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(x) for x in err.absolute_path) or "<root>"


def validate(cfg: dict) -> dict:
    """Validate ``cfg`` against :data:`SCHEMA`, raising :class:`SchemaError` with the offending path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(e.absolute_path), str(e.absolute_path)))
    if errors:
        err = errors[0]
        # oneOf failures hide the useful message; surface the best sub-error
        best = jsonschema.exceptions.best_match(errors)
        msg = best.message if best is not None else err.message
        raise SchemaError(f"{_path(best or err)}: {msg}")
    if "sampled" == cfg.get("drift", {}).get("kind") and not {"r", "b"} <= set(cfg["drift"]):
        raise SchemaError("drift: sampled drift needs 'r' and 'b' arrays")
    return cfg


def load(path: str | os.PathLike) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return validate(cfg)


# ---------------------------------------------------------------------------
# construction


def build_manifold(block: dict) -> ModelManifold:
    kind = block["kind"]
    param = {"euclidean": None, "hyperbolic": block.get("h"), "ricci_decay": block.get("beta_bar")}[kind]
    return make_model_manifold(kind, block["n"], param)


def build_drift(block: dict | None) -> RadialDriftField:
    block = block or {"kind": "none"}
    kind = block["kind"]
    param = block.get("b1") if kind == "constant_radial" else block.get("nu")
    table = (block["r"], block["b"]) if kind == "sampled" else None
    return make_drift(kind, param, table=table, bounds=block.get("bounds"))


def build_solver_config(block: dict) -> SolverConfig:
    block = dict(block)
    every = block.pop("snapshot_every", None)
    times = list(block.pop("snapshot_times", []))
    if every is not None:
        k = int(block["t_end"] / every + 1e-9)
        times += [i * every for i in range(k + 1)]
    times = sorted(set(t for t in times if t <= block["t_end"]))
    return SolverConfig(snapshot_times=tuple(times), **block)


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with the manifold and drift already built."""

    raw: dict
    manifold: ModelManifold
    drift: RadialDriftField

    @property
    def name(self) -> str:
        return self.raw["name"]

    @property
    def tag(self) -> str:
        return self.raw.get("theorem_tag", "freeform")

    @property
    def p(self) -> float:
        return float(self.raw["p"])

    @property
    def barriers(self) -> dict:
        return self.raw.get("barriers", {})

    @property
    def solver(self) -> SolverConfig | None:
        blk = self.raw.get("solver")
        return build_solver_config(blk) if blk is not None else None

    def with_cell(self, p: float, amplitude: float) -> "Scenario":
        """Copy with ``p`` and the datum's amplitude (or factor) replaced."""
        raw = copy.deepcopy(self.raw)
        raw["p"] = p
        d = raw["initial_datum"]
        if d["kind"] == "barrier_multiple":
            d["factor"] = amplitude
            d.pop("fraction_of_c_tilde", None)
        else:
            d["amplitude"] = amplitude
            d.pop("mass_factor", None)
        raw.pop("sweep", None)
        return Scenario(raw, self.manifold, self.drift)


def scenario_from_dict(cfg: dict) -> Scenario:
    cfg = validate(cfg)
    return Scenario(cfg, build_manifold(cfg["manifold"]), build_drift(cfg.get("drift")))


def load_scenario(path: str | os.PathLike) -> Scenario:
    return scenario_from_dict(load(path))


def plain_datum(block: dict):
    """Datum objects that need no barrier: gaussian and constant_on_ball with an explicit amplitude."""
    if block["kind"] == "gaussian":
        return Gaussian(block["amplitude"], block.get("width", 1.0))
    if block["kind"] == "constant_on_ball" and "amplitude" in block:
        return ConstantOnBall(block["amplitude"], block["radius"])
    return None
