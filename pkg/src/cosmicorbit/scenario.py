"""Scenario files: strict JSON schema, validation, operator construction, builtins."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import operators as ops
from .cones import PolyhedronH
from .errors import CosmicError, ParseError, ValidationError

DEFAULT_TOLERANCES = {
    "prox_tol": 1e-12,
    "proj_tol": 1e-12,
    "zero_tol": 1e-14,
    "dir_tol": 1e-6,
    "window": 200,
    "tail_fraction": 0.2,
}

_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}


def _obj(required, **props):
    return {"type": "object", "required": list(required), "additionalProperties": False,
            "properties": props}


def _tagged(tag, required=(), **props):
    return _obj(("type",) + tuple(required), type={"const": tag}, **props)


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {
        "set": {"oneOf": [
            _tagged("halfspace", ("u", "eta"), u=_vec, eta={"type": "number"}),
            _tagged("hyperplane", ("u", "eta"), u=_vec, eta={"type": "number"}),
            _tagged("affine", ("basis", "offset"), basis={"type": "array", "items": _vec}, offset=_vec),
            _tagged("box", ("lo", "hi"), lo=_vec, hi=_vec),
            _tagged("ball", ("center", "radius"), center=_vec, radius={"type": "number"}),
            _tagged("epigraph_reciprocal", ("c",), c={"type": "number"}),
            _tagged("polyhedron", ("rows",), rows={"type": "array", "minItems": 1, "items": _obj(
                ("u", "eta"), u=_vec, eta={"type": "number"})}),
        ]},
        "fn": {"oneOf": [
            _tagged("reciprocal", ("c",), c={"type": "number"}),
            _tagged("exp_neg"),
            _tagged("zero"),
        ]},
        "operator": {"oneOf": [
            _tagged("identity"),
            _tagged("translation", ("c",), c=_vec),
            _tagged("linear", ("matrix",), matrix=_mat),
            _tagged("projector", ("set",), set={"$ref": "#/$defs/set"}),
            _tagged("composition", ("ops",), ops={"type": "array", "minItems": 1,
                                                   "items": {"$ref": "#/$defs/operator"}}),
            _tagged("prox_lifted", ("a", "f"), a=_vec, f={"$ref": "#/$defs/fn"}),
            _tagged("lifted_resolvent", ("basis", "inner"), basis=_mat, inner={"$ref": "#/$defs/operator"}),
            _tagged("prox_exp_ratio"),
            _tagged("alternating_projections", ("A", "B"), A={"$ref": "#/$defs/set"}, B={"$ref": "#/$defs/set"}),
        ]},
    },
    **_obj(
        ("name", "dim", "operator", "x0", "n_steps"),
        name={"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        description={"type": "string"},
        dim={"type": "integer", "minimum": 1},
        operator={"$ref": "#/$defs/operator"},
        x0=_vec,
        n_steps={"type": "integer", "minimum": 1},
        tolerances=_obj((), prox_tol={"type": "number", "exclusiveMinimum": 0},
                        proj_tol={"type": "number", "exclusiveMinimum": 0},
                        zero_tol={"type": "number", "minimum": 0},
                        dir_tol={"type": "number", "exclusiveMinimum": 0},
                        window={"type": "integer", "minimum": 2},
                        tail_fraction={"type": "number", "exclusiveMinimum": 0, "maximum": 1}),
        outputs=_obj((), csv={"type": "boolean"}, svg={"type": "boolean"}, summary={"type": "boolean"}),
        conjectural={"type": "boolean"},
        reference_limit=_vec,
    ),
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass
class Scenario:
    name: str
    dim: int
    operator: dict
    x0: list
    n_steps: int
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: dict = field(default_factory=dict)
    description: str = ""
    conjectural: bool = False
    reference_limit: Optional[list] = None

    @property
    def is_alternating(self) -> bool:
        return self.operator["type"] == "alternating_projections"

    def with_steps(self, n_steps: int) -> "Scenario":
        if n_steps < 1:
            raise ValidationError("--steps must be at least 1")
        s = copy.deepcopy(self)
        s.n_steps = int(n_steps)
        return s


def _path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def scenario_from_dict(data) -> Scenario:
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        err = errors[-1]
        if err.context:
            # oneOf failure: report the branch whose tag matched, if any
            err = max(err.context, key=lambda e: len(list(e.absolute_path)))
        raise ParseError(f"field {_path(err)}: {err.message}")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(data.get("tolerances", {}))
    dim = data["dim"]
    outputs = {"csv": True, "summary": True, "svg": dim == 2}
    outputs.update(data.get("outputs", {}))
    s = Scenario(
        name=data["name"], dim=dim, operator=data["operator"], x0=list(data["x0"]),
        n_steps=data["n_steps"], tolerances=tol, outputs=outputs,
        description=data.get("description", ""), conjectural=data.get("conjectural", False),
        reference_limit=data.get("reference_limit"),
    )
    validate(s)
    return s


def scenario_to_dict(s: Scenario) -> dict:
    d = {"name": s.name, "description": s.description, "dim": s.dim, "operator": s.operator,
         "x0": s.x0, "n_steps": s.n_steps, "tolerances": s.tolerances, "outputs": s.outputs,
         "conjectural": s.conjectural}
    if s.reference_limit is not None:
        d["reference_limit"] = s.reference_limit
    return d


def load_scenario(path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def validate(s: Scenario) -> None:
    """Semantic checks beyond the schema: dimensions, set parameters, outputs."""
    if len(s.x0) != s.dim:
        raise ValidationError(f"x0 has {len(s.x0)} coordinates, dim is {s.dim}")
    if s.outputs.get("svg") and s.dim != 2:
        raise ValidationError("svg output is only available for dim 2")
    if s.reference_limit is not None and len(s.reference_limit) != s.dim:
        raise ValidationError("reference_limit has the wrong dimension")
    try:
        build_operator(s.operator, s.dim, s.tolerances)
    except ValidationError:
        raise
    except CosmicError as exc:
        raise ValidationError(f"operator: {exc}") from None


# -- construction ----------------------------------------------------------------------


def _need_dim(what, n, dim):
    if n != dim:
        raise ValidationError(f"{what} has dimension {n}, expected {dim}")


def build_set(spec: dict, dim: int):
    t = spec["type"]
    if t == "halfspace":
        S = ops.Halfspace(spec["u"], spec["eta"])
    elif t == "hyperplane":
        S = ops.Hyperplane(spec["u"], spec["eta"])
    elif t == "affine":
        S = ops.AffineSubspace(np.array(spec["basis"], dtype=float).reshape(-1, len(spec["offset"])),
                               spec["offset"])
    elif t == "box":
        S = ops.Box(spec["lo"], spec["hi"])
    elif t == "ball":
        S = ops.Ball(spec["center"], spec["radius"])
    elif t == "epigraph_reciprocal":
        S = ops.EpigraphReciprocal(spec["c"])
    else:
        rows = spec["rows"]
        if len({len(r["u"]) for r in rows}) != 1:
            raise ValidationError("polyhedron rows differ in dimension")
        S = PolyhedronH([r["u"] for r in rows], [r["eta"] for r in rows])
    _need_dim(f"{t} set", S.dim, dim)
    return S


def build_fn(spec: dict) -> ops.ScalarConvexFn:
    t = spec["type"]
    if t == "reciprocal":
        return ops.reciprocal(spec["c"])
    if t == "exp_neg":
        return ops.exp_neg()
    return ops.zero_fn()


def build_operator(spec: dict, dim: int, tol: Optional[dict] = None) -> ops.Operator:
    """Operator described by ``spec``; alternating projections map to ``P_B P_A``."""
    tol = tol or DEFAULT_TOLERANCES
    t = spec["type"]
    if t == "identity":
        return ops.identity(dim)
    if t == "translation":
        T = ops.translation(spec["c"])
    elif t == "linear":
        T = ops.linear(spec["matrix"])
    elif t == "projector":
        T = ops.projector(build_set(spec["set"], dim), tol["proj_tol"])
    elif t == "composition":
        T = ops.compose([build_operator(o, dim, tol) for o in spec["ops"]])
    elif t == "prox_lifted":
        T = ops.lift_prox_along_direction(spec["a"], build_fn(spec["f"]), tol["prox_tol"])
    elif t == "lifted_resolvent":
        k = len(spec["basis"])
        inner = build_operator(spec["inner"], k, tol)
        T = ops.lifted_resolvent(spec["basis"], inner)
    elif t == "prox_exp_ratio":
        T = ops.exp_ratio_prox_operator(tol["prox_tol"])
    else:
        A, B = ap_sets(spec, dim)
        T = ops.compose([ops.projector(B, tol["proj_tol"]), ops.projector(A, tol["proj_tol"])])
    _need_dim(f"{t} operator", T.dim, dim)
    return T


def ap_sets(spec: dict, dim: int):
    return build_set(spec["A"], dim), build_set(spec["B"], dim)


# -- builtins ---------------------------------------------------------------------------

_R2 = 1.0 / math.sqrt(2.0)

_BUILTINS = [
    {
        "name": "example-recip",
        "description": "prox of F(x) = 1/(x1 + x2) on x1 + x2 > 0, i.e. the reciprocal 1/(sqrt(2) s) "
                       "lifted along a = (1,1)/sqrt(2); Q_n -> a",
        "dim": 2,
        "operator": {"type": "prox_lifted", "a": [_R2, _R2], "f": {"type": "reciprocal", "c": _R2}},
        "x0": [5.0, -3.0], "n_steps": 10_000,
        "reference_limit": [_R2, _R2],
    },
    {
        "name": "example-expratio",
        "description": "prox of F(x) = exp(x1)/x2 on x2 > 0; the observed limit (-1, 0) is conjectural",
        "dim": 2,
        "operator": {"type": "prox_exp_ratio"},
        "x0": [0.0, 1.0], "n_steps": 100_000,
        "conjectural": True, "reference_limit": [-1.0, 0.0],
    },
    {
        "name": "ap-epigraph",
        "description": "Figure-1-style alternating projections: A = {x2 <= 0}, B = {x1 > 0, x2 >= 1/x1}; "
                       "disjoint with unattained zero distance, cluster cone is the ray through (1,0)",
        "dim": 2,
        "operator": {"type": "alternating_projections",
                     "A": {"type": "halfspace", "u": [0.0, 1.0], "eta": 0.0},
                     "B": {"type": "epigraph_reciprocal", "c": 1.0}},
        "x0": [1.0, 1.0], "n_steps": 100_000,
        "tolerances": {"dir_tol": 1e-4},
        "reference_limit": [1.0, 0.0],
    },
    {
        "name": "ap-epigraph-vertical",
        "description": "alternating projections: A = {x1 <= 0}, B = {x1 > 0, x2 >= 1/x1}; cluster cone "
                       "is the ray through (0,1)",
        "dim": 2,
        "operator": {"type": "alternating_projections",
                     "A": {"type": "halfspace", "u": [1.0, 0.0], "eta": 0.0},
                     "B": {"type": "epigraph_reciprocal", "c": 1.0}},
        "x0": [1.0, 1.0], "n_steps": 10_000,
        "tolerances": {"dir_tol": 1e-3},
        "reference_limit": [0.0, 1.0],
    },
    {
        "name": "ap-parallel-halfplanes",
        "description": "alternating projections between {x2 <= 0} and {x2 >= 1}: disjoint, distance "
                       "attained, gap (0,1), fixed points exist",
        "dim": 2,
        "operator": {"type": "alternating_projections",
                     "A": {"type": "halfspace", "u": [0.0, 1.0], "eta": 0.0},
                     "B": {"type": "halfspace", "u": [0.0, -1.0], "eta": -1.0}},
        "x0": [2.0, -3.0], "n_steps": 100,
    },
    {
        "name": "translation-1-0",
        "description": "translation by (1,0): linear escape with v = (-1,0)",
        "dim": 2,
        "operator": {"type": "translation", "c": [1.0, 0.0]},
        "x0": [0.0, 0.0], "n_steps": 1000,
        "reference_limit": [1.0, 0.0],
    },
    {
        "name": "prox-expneg-1d",
        "description": "prox of exp(-s) on the line: fixed-point free, sublinear escape to +infinity",
        "dim": 1,
        "operator": {"type": "prox_lifted", "a": [1.0], "f": {"type": "exp_neg"}},
        "x0": [0.0], "n_steps": 100_000,
        "reference_limit": [1.0],
    },
    {
        "name": "identity-smoke",
        "description": "identity map: every iterate equals x0",
        "dim": 2,
        "operator": {"type": "identity"},
        "x0": [1.0, 1.0], "n_steps": 10,
        "reference_limit": [_R2, _R2],
    },
    {
        "name": "rotation-bounded",
        "description": "rotation by 0.5 rad: bounded orbit, directions keep cycling",
        "dim": 2,
        "operator": {"type": "linear", "matrix": [[math.cos(0.5), -math.sin(0.5)],
                                                  [math.sin(0.5), math.cos(0.5)]]},
        "x0": [1.0, 0.0], "n_steps": 1000,
    },
    {
        "name": "lifted-expratio-5d",
        "description": "exp-ratio prox acting on span(e1, e2) inside R^5, identity on the complement",
        "dim": 5,
        "operator": {"type": "lifted_resolvent",
                     "basis": [[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]],
                     "inner": {"type": "prox_exp_ratio"}},
        "x0": [0.0, 1.0, 3.0, -4.0, 0.5], "n_steps": 2000,
    },
]


def list_builtins() -> list[tuple[str, str]]:
    return [(b["name"], b["description"]) for b in _BUILTINS]


def builtin(name: str) -> Scenario:
    for b in _BUILTINS:
        if b["name"] == name:
            return scenario_from_dict(copy.deepcopy(b))
    raise ParseError(f"unknown builtin scenario {name!r}")


def resolve(target: str) -> Scenario:
    """A scenario file path or a builtin name."""
    p = Path(target)
    if p.suffix == ".json" or p.exists():
        if not p.exists():
            raise ParseError(f"scenario file {target} not found")
        return load_scenario(p)
    return builtin(target)
