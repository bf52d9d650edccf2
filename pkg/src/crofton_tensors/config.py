"""YAML configuration: body specifications and per-command experiment settings.

Unknown keys are rejected.  Command-line flags override file values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import pi
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .bodies import Ball, ConvexBody, Ellipsoid, Polytope, euler_rotation, rotation_matrix


class ConfigError(ValueError):
    """Invalid configuration (exit code 2 in the CLI)."""


def _angle(v) -> float:
    """Angles may be numbers or strings such as '3*pi/16'."""
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        expr = v.replace(" ", "")
        if not set(expr) <= set("0123456789.+-*/()pie"):
            raise ConfigError(f"bad angle expression {v!r}")
        try:
            return float(eval(expr, {"__builtins__": {}}, {"pi": pi}))
        except Exception as exc:  # noqa: BLE001
            raise ConfigError(f"bad angle expression {v!r}") from exc
    raise ConfigError(f"bad angle {v!r}")


# bodies ------------------------------------------------------------------------------

BODY_KEYS = {
    "ball": {"kind", "center", "radius"},
    "ellipsoid": {"kind", "center", "semi_axes", "rotation"},
    "polygon": {"kind", "vertices"},
    "box": {"kind", "lo", "hi"},
    "hull": {"kind", "points"},
}


def _rotation(spec, n: int) -> np.ndarray:
    if spec is None:
        return np.eye(n)
    if n == 2:
        return rotation_matrix(0, _angle(spec), 2)
    try:
        steps = [(int(a), _angle(t)) for a, t in spec]
    except (TypeError, ValueError) as exc:
        raise ConfigError("3-D rotation must be a list of [axis, angle] pairs") from exc
    if any(a not in (1, 2, 3) for a, _ in steps):
        raise ConfigError("rotation axes are 1, 2 or 3")
    return euler_rotation(steps)


def body_from_dict(d: dict) -> ConvexBody:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("body needs a 'kind'")
    kind = d["kind"]
    if kind not in BODY_KEYS:
        raise ConfigError(f"unknown body kind {kind!r}; choose from {sorted(BODY_KEYS)}")
    extra = set(d) - BODY_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown keys for {kind}: {sorted(extra)}")
    try:
        if kind == "ball":
            return Ball(np.asarray(d["center"], float), float(d["radius"]))
        if kind == "ellipsoid":
            c = np.asarray(d["center"], float)
            return Ellipsoid(c, np.asarray(d["semi_axes"], float), _rotation(d.get("rotation"), c.size))
        if kind == "polygon":
            return Polytope.polygon(d["vertices"])
        if kind == "box":
            return Polytope.box(d["lo"], d["hi"])
        return Polytope.from_hull(d["points"])
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"{kind} is missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_yaml(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping")
    return data


def load_body(path) -> ConvexBody:
    data = load_yaml(path)
    return body_from_dict(data.get("body", data))


# experiment settings ----------------------------------------------------------------

def _even(v):
    v = int(v)
    if v < 0 or v % 2:
        raise ConfigError(f"s must be even and non-negative, got {v}")
    return v


def _nonneg_int(v):
    v = int(v)
    if v < 0:
        raise ConfigError(f"expected a non-negative integer, got {v}")
    return v


def _pos_int(v):
    v = int(v)
    if v < 1:
        raise ConfigError(f"expected a positive integer, got {v}")
    return v


def _reps(v):
    v = int(v)
    if v < 2:
        raise ConfigError(f"reps must be >= 2, got {v}")
    return v


def _pos_float(v):
    v = float(v)
    if not v > 0:
        raise ConfigError(f"expected a positive number, got {v}")
    return v


def _floats(v):
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split()]
    return [float(x) for x in v]


def _ints(v):
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split()]
    return [int(x) for x in v]


def _choice(*opts):
    def f(v):
        if v not in opts:
            raise ConfigError(f"expected one of {opts}, got {v!r}")
        return v
    return f


def _nodes(v):
    if v == "auto":
        return v
    vals = _ints(v) if not isinstance(v, (list, tuple)) else [int(x) for x in v]
    if len(vals) != 2 or min(vals) < 16:
        raise ConfigError("nodes must be two counts D,O, each >= 16")
    return vals


def _component(v):
    vals = _ints(v) if not isinstance(v, (list, tuple)) else [int(x) for x in v]
    if len(vals) != 2 or not all(x in (1, 2) for x in vals):
        raise ConfigError("component must be i,j with i, j in {1, 2}")
    return vals


def _path(v):
    return str(v)


# key -> (parser, default); None default means required
SCHEMAS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "coeffs": {"s": (_even, 4), "n": (_pos_int, 2)},
    "truth": {"body": (_path, None), "s": (_even, 2), "nodes": (_nodes, [256, 16])},
    "oracle": {"body": (_path, None), "s": (_even, 2), "nodes": (_nodes, "auto")},
    "estimate": {
        "design": (_choice("iur", "proj", "syst", "vert", "vertw", "weighted"), "iur"),
        "body": (_path, None), "s": (_even, 2), "reps": (_reps, 100_000), "seed": (int, 1),
        "lines": (_pos_int, 1), "frame": (_choice("iid", "orthogonal"), "iid"),
        "ref_center": (_floats, None), "ref_radius": (_pos_float, None),
        "axis": (_floats, [0.0, 0.0, 1.0]), "component": (_component, [1, 1]),
        "density": (_choice("uniform", "fstar", "fstarK"), "fstar"),
    },
    "figure1": {"eps": (_pos_float, 0.1), "grid": (_pos_int, 500), "nmax": (_pos_int, 12)},
    "figure2": {"reps": (_reps, 100_000), "seed": (int, 44), "ls": (_ints, [1, 2, 3, 4, 5])},
    "curves": {"points": (_pos_int, 1000)},
    "process": {
        "gamma": (_pos_float, 50.0), "grain": (_path, None), "window": (_floats, [8.0, 8.0]),
        "s": (_even, 2), "lines": (_pos_int, 8), "seglen": (_pos_float, 6.0),
        "reps": (_reps, 1000), "seed": (int, 5), "design": (_choice("iid", "systematic"), "systematic"),
    },
    "selfcheck": {},
}

# keys that never affect results and so stay out of the config hash
RUNTIME_KEYS = {"out", "threads", "config"}
# file references; the CLI hashes their contents instead of their paths
PATH_KEYS = ("body", "grain")


def resolve_paths(file_values: dict, config_path) -> dict:
    """Relative file references inside a config file are taken relative to that file."""
    base = Path(config_path).resolve().parent
    out = dict(file_values)
    for k in PATH_KEYS:
        if k in out and isinstance(out[k], str) and not Path(out[k]).is_absolute():
            out[k] = str(base / out[k])
    return out


@dataclass
class ExperimentConfig:
    command: str
    values: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, command: str, file_values: dict | None, flag_values: dict) -> ExperimentConfig:
        schema = SCHEMAS[command]
        merged = {}
        for src in (file_values or {}), {k: v for k, v in flag_values.items() if v is not None}:
            for k, v in src.items():
                if k in RUNTIME_KEYS:
                    continue
                if k not in schema:
                    raise ConfigError(f"unknown key {k!r} for {command}")
                merged[k] = v
        values = {}
        for k, (parse, default) in schema.items():
            if k in merged:
                try:
                    values[k] = parse(merged[k])
                except ConfigError:
                    raise
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {k}: {merged[k]!r}") from exc
            elif default is not None:
                values[k] = default
            elif k in ("ref_center", "ref_radius"):
                values[k] = None
            else:
                raise ConfigError(f"missing required key {k!r} for {command}")
        return cls(command, values)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError as exc:
            raise AttributeError(key) from exc

    def canonical(self) -> str:
        values = {k: v for k, v in self.values.items() if k not in PATH_KEYS}
        return json.dumps({"command": self.command, **values}, sort_keys=True, separators=(",", ":"))

    def hash(self, extra: str = "") -> str:
        return hashlib.sha256((self.canonical() + extra).encode()).hexdigest()[:16]


def grain_from_dict(d: dict, dim: int):
    from .particle_process import GrainLaw

    allowed = {"kind", "radius", "radius_min", "semi_axes"}
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown grain keys {sorted(extra)}")
    try:
        return GrainLaw(
            kind=d["kind"], dim=dim, radius=float(d.get("radius", 0.5)),
            radius_min=float(d.get("radius_min", 0.0)),
            semi_axes=tuple(float(x) for x in d.get("semi_axes", ())),
        )
    except KeyError as exc:
        raise ConfigError("grain needs a 'kind'") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
