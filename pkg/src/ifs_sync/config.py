"""Experiment configuration: JSON schema, validation with field paths, defaults."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .cocycle import FiniteIFS, RandomFamily, SystemSpec, system_from_dict
from .diffeos import ParameterRangeError, diffeo_from_dict, noise_from_dict
from .driving import ProbabilityVector
from .geometry import CIRCLE, SPHERE

SEED_MAX = 2**64 - 1

_num = {"type": "number"}
_vec3 = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}


def _int(minimum, maximum=None):
    s = {"type": "integer", "minimum": minimum}
    if maximum is not None:
        s["maximum"] = maximum
    return s


def _pos(exclusive=0.0):
    return {"type": "number", "exclusiveMinimum": exclusive}


_MAP_FIELDS = {
    "rotation": ({"alpha": _num}, ["alpha"]),
    "north_south": ({"c": _num}, ["c"]),
    "flat_ns": ({"c": _num, "r0": _num, "kappa0": _num}, ["c", "r0", "kappa0"]),
    "equivariant_ns": ({"c": _num}, ["c"]),
    "sphere_rotation": ({"axis": _vec3, "angle": _num}, ["axis", "angle"]),
    "sphere_scale": ({"lam": _num, "swapped": {"type": "boolean"}}, ["lam"]),
    "composition": ({"maps": {"type": "array", "items": {"$ref": "#/$defs/map"}, "minItems": 1}}, ["maps"]),
    "translated": ({"base": {"$ref": "#/$defs/map"}, "a": {"oneOf": [_num, _vec3]}}, ["base", "a"]),
    "inverse": ({"base": {"$ref": "#/$defs/map"}}, ["base"]),
}

_POINT = {"oneOf": [_num, _vec3]}
_INIT = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["uniform", "delta", "arc"]},
        "params": {"type": "array", "items": _num},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

# kind -> {parameter: (schema, default)}; a default of None means optional without default
KIND_PARAMS = {
    "lyapunov": {
        "n": (_int(2), 100_000),
        "burn": (_int(0), 1000),
        "blocks": (_int(2), 10),
        "x0": (_POINT, None),
        "bound_samples": (_int(0), 0),
    },
    "stationary": {
        "method": ({"enum": ["mc", "ulam"]}, "mc"),
        "n_burn": (_int(0), 1000),
        "n_keep": (_int(1), 100_000),
        "resolution": (_int(2, 100_000), 256),
        "samples_per_cell": (_int(1), 100),
        "tol": (_pos(), 1e-10),
        "floor": ({"type": "number", "minimum": 0, "exclusiveMaximum": 1}, 0.01),
    },
    "pullback": {
        "depth": (_int(1), 500),
        "ensemble": (_int(20), 200),
        "thin": (_int(1), 10),
        "n_burn": (_int(0), 1000),
        "cluster_radius": (_pos(), None),
    },
    "sync": {
        "pairs": (_int(1), 500),
        "n": (_int(2), 2000),
        "tol": (_pos(), 1e-6),
    },
    "minimality": {
        "x0": (_num, 0.0),
        "resolution": (_int(2, 10_000_000), 512),
        "T": (_int(1, 10_000_000), 5000),
    },
    "baker-verify": {
        "words": (_int(1), 1000),
        "length": (_int(2, 1000), 40),
        "threshold": (_pos(), 1e-9),
    },
    "isolate": {
        "U": ({"type": "array", "items": _num, "minItems": 2, "maxItems": 2}, None),
        "n_samples": (_int(1), 1000),
    },
    "unique": {
        "inits": ({"type": "array", "items": _INIT, "minItems": 2}, None),
        "n_burn": (_int(0), 1000),
        "n_keep": (_int(1), 100_000),
        "resolution": (_int(2, 1000), 8),
    },
}
KIND_PARAMS["spectrum"] = KIND_PARAMS["lyapunov"]
KINDS = tuple(sorted(KIND_PARAMS))
REQUIRED_PARAMS = {"isolate": ["U"]}

DEFAULT_INITS = {
    CIRCLE: [
        {"kind": "uniform"},
        {"kind": "delta", "params": [0.0]},
        {"kind": "delta", "params": [0.5]},
        {"kind": "arc", "params": [0.2, 0.3]},
    ],
    SPHERE: [
        {"kind": "uniform"},
        {"kind": "delta", "params": [0.0, 0.0, 1.0]},
        {"kind": "delta", "params": [0.0, 0.0, -1.0]},
        {"kind": "arc", "params": [1.0, 0.0, 0.0, 0.3]},
    ],
}
DEFAULT_CLUSTER_RADIUS = {CIRCLE: 1e-4, SPHERE: 1e-3}


def _conditional(tag, cases):
    return [
        {
            "if": {"properties": {tag: {"const": name}}, "required": [tag]},
            "then": {
                "properties": {tag: True, **props},
                "required": required,
                "additionalProperties": False,
            },
        }
        for name, (props, required) in cases.items()
    ]


def build_schema() -> dict:
    experiment_cases = {
        kind: ({p: s for p, (s, _) in params.items()}, ["kind"] + REQUIRED_PARAMS.get(kind, []))
        for kind, params in KIND_PARAMS.items()
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "ifs-sync experiment configuration",
        "type": "object",
        "properties": {
            "system": {
                "type": "object",
                "properties": {
                    "manifold": {"enum": [CIRCLE, SPHERE]},
                    "maps": {"type": "array", "items": {"$ref": "#/$defs/map"}, "minItems": 1},
                    "probs": {"type": "array", "items": _num, "minItems": 1},
                    "noise": {
                        "type": "object",
                        "properties": {"dist": {"enum": ["uniform", "triangular"]}, "delta": _num},
                        "required": ["dist", "delta"],
                        "additionalProperties": False,
                    },
                },
                "required": ["manifold", "maps"],
                "additionalProperties": False,
                "if": {"not": {"required": ["noise"]}},
                "then": {"required": ["probs"]},
            },
            "experiment": {
                "type": "object",
                "properties": {"kind": {"enum": list(KINDS)}},
                "required": ["kind"],
                "allOf": _conditional("kind", experiment_cases),
            },
            "seed": _int(0, SEED_MAX),
            "output": {"type": "string", "minLength": 1},
        },
        "required": ["system", "experiment", "seed", "output"],
        "additionalProperties": False,
        "$defs": {
            "map": {
                "type": "object",
                "properties": {"type": {"enum": list(_MAP_FIELDS)}},
                "required": ["type"],
                "allOf": _conditional("type", _MAP_FIELDS),
            }
        },
    }


SCHEMA = build_schema()
_VALIDATOR = Draft202012Validator(SCHEMA)


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _format_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _check_maps(maps, path):
    """Build every map bottom-up so range errors carry their full path."""
    for i, d in enumerate(maps):
        here = f"{path}[{i}]"
        if d["type"] == "composition":
            _check_maps(d["maps"], f"{here}.maps")
        elif d["type"] in ("translated", "inverse"):
            _check_maps([d["base"]], f"{here}.base")
        try:
            diffeo_from_dict(d)
        except ParameterRangeError as e:
            raise ConfigError(f"{here}.{e.field}", str(e).split(": ", 1)[1]) from None
        except (TypeError, ValueError) as e:
            raise ConfigError(here, str(e)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    system: dict
    experiment: dict
    seed: int
    output: str
    defaults: tuple = field(default=(), compare=False)

    @property
    def kind(self) -> str:
        return self.experiment["kind"]

    @property
    def manifold(self) -> str:
        return self.system["manifold"]

    def build_system(self) -> SystemSpec:
        return system_from_dict(self.system)

    def to_dict(self) -> dict:
        return {
            "system": copy.deepcopy(self.system),
            "experiment": copy.deepcopy(self.experiment),
            "seed": self.seed,
            "output": self.output,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def parse_config(text: str | bytes) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("", f"malformed JSON: {e}") from None
    return config_from_dict(doc)


def config_from_dict(doc) -> ExperimentConfig:
    err = best_match(_VALIDATOR.iter_errors(doc))
    if err is not None:
        raise ConfigError(_format_path(err.absolute_path) or "(root)", err.message)
    system = copy.deepcopy(doc["system"])
    manifold = system["manifold"]
    _check_maps(system["maps"], "system.maps")
    sys = _build_system(system)

    exp = copy.deepcopy(doc["experiment"])
    kind = exp["kind"]
    filled = []
    for name, (_, default) in KIND_PARAMS[kind].items():
        if name not in exp:
            if default is not None:
                exp[name] = default
                filled.append(name)
            elif name == "cluster_radius":
                exp[name] = DEFAULT_CLUSTER_RADIUS[manifold]
                filled.append(name)
            elif name == "inits":
                exp[name] = copy.deepcopy(DEFAULT_INITS[manifold])
                filled.append(name)
    _check_kind(kind, exp, sys)
    return ExperimentConfig(system, exp, int(doc["seed"]), doc["output"], tuple(filled))


def _build_system(system) -> SystemSpec:
    if "noise" in system:
        try:
            noise_from_dict(system["noise"]).check(system["manifold"])
        except ParameterRangeError as e:
            raise ConfigError(f"system.noise.{e.field}", str(e).split(": ", 1)[1]) from None
    else:
        try:
            ProbabilityVector(system["probs"])
        except ValueError as e:
            raise ConfigError("system.probs", str(e)) from None
    try:
        return system_from_dict(system)
    except ValueError as e:
        raise ConfigError("system", str(e)) from None


def _check_kind(kind, exp, sys):
    manifold = sys.manifold
    if "x0" in exp:
        x0 = exp["x0"]
        if (manifold == CIRCLE) != isinstance(x0, (int, float)):
            raise ConfigError("experiment.x0", f"point does not lie on the {manifold}")
        if manifold == SPHERE and sum(c * c for c in x0) == 0:
            raise ConfigError("experiment.x0", "zero vector is not a sphere point")
    if kind == "minimality" and not (isinstance(sys, FiniteIFS) and manifold == CIRCLE):
        raise ConfigError("experiment.kind", "minimality needs a finite IFS on the circle")
    if kind == "baker-verify" and not isinstance(sys, FiniteIFS):
        raise ConfigError("experiment.kind", "baker-verify needs a probability vector, not a noise family")
    if kind == "lyapunov" or kind == "spectrum":
        if exp["blocks"] > exp["n"]:
            raise ConfigError("experiment.blocks", "must not exceed n")
    if kind == "isolate":
        if not (isinstance(sys, RandomFamily) and manifold == CIRCLE):
            raise ConfigError("experiment.kind", "isolate needs a noise family on the circle")
        a, b = exp["U"]
        if not 0 < b - a < 1:
            raise ConfigError("experiment.U", "arc must satisfy 0 < b - a < 1")
    if kind == "unique":
        for i, init in enumerate(exp["inits"]):
            need = {"uniform": 0, "delta": 1 if manifold == CIRCLE else 3, "arc": 2 if manifold == CIRCLE else 4}
            if len(init.get("params", [])) != need[init["kind"]]:
                raise ConfigError(
                    f"experiment.inits[{i}].params",
                    f"{init['kind']} on the {manifold} takes {need[init['kind']]} numbers",
                )
