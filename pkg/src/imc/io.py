"""JSON model documents, gamble files and their canonical serialisation.

A model document looks like::

    {
      "format_version": 1,
      "states": ["a", "b"],
      "initial": {"kind": "interval", "lower": {...}, "upper": {...}},
      "transition": {"a": {...}, "b": {...}},
      "metadata": {}
    }

``transition`` is either one mapping (stationary chain) or a list of
mappings, one per time step.  Model kinds: precise, vacuous, contamination,
belief, interval, polytope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from imc.core import CredalPolytope, StateSpace
from imc.errors import IMCError
from imc.models import Belief, Contamination, Interval, Polytope, Precise, Vacuous
from imc.operators import UpperTransitionOperator
from imc.recursion import ImpreciseMarkovChain

FORMAT_VERSION = 1

_KIND_FIELDS = {
    "precise": {"mass"},
    "vacuous": set(),
    "contamination": {"epsilon", "base"},
    "belief": {"focal"},
    "interval": {"lower", "upper"},
    "polytope": {"constraints", "vertices"},
}


class DocumentError(IMCError, ValueError):
    """A model, gamble or grid file is malformed; the message names the location."""


def _fail(where, message):
    raise DocumentError(f"{where}: {message}")


def loads_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_json(path):
    with open(path) as fh:
        return loads_json(fh.read(), str(path))


@dataclass
class ModelDocument:
    chain: ImpreciseMarkovChain
    initial_spec: dict
    transition_spec: object
    metadata: dict = field(default_factory=dict)

    @property
    def space(self) -> StateSpace:
        return self.chain.space

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "states": list(self.space.states),
            "initial": self.initial_spec,
            "transition": self.transition_spec,
            "metadata": self.metadata,
        }


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        _fail(where, f"unknown field(s) {unknown}")
    for key in required:
        if key not in obj:
            _fail(where, f"missing field {key!r}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    return float(value)


def _state_map(space, obj, where, complete=False):
    if not isinstance(obj, dict):
        _fail(where, "expected an object mapping state labels to numbers")
    out = np.zeros(space.size)
    for key, value in obj.items():
        if key not in space.states:
            _fail(f"{where}.{key}", f"unknown state {key!r}")
        out[space.index(key)] = _number(value, f"{where}.{key}")
    if complete:
        missing = [s for s in space.states if s not in obj]
        if missing:
            _fail(where, f"no value for states {missing}")
    return out


def parse_model(space: StateSpace, spec, where="$"):
    """Build an uncertainty model from its JSON form."""
    if not isinstance(spec, dict):
        _fail(where, "expected an object with a 'kind' field")
    kind = spec.get("kind")
    if kind not in _KIND_FIELDS:
        _fail(f"{where}.kind", f"unknown model kind {kind!r}; expected one of {sorted(_KIND_FIELDS)}")
    _check_keys(spec, _KIND_FIELDS[kind] | {"kind"}, where)
    try:
        if kind == "precise":
            _check_keys(spec, {"kind", "mass"}, where, ["mass"])
            return Precise(_state_map(space, spec["mass"], f"{where}.mass"))
        if kind == "vacuous":
            return Vacuous(space.size)
        if kind == "contamination":
            _check_keys(spec, {"kind", "epsilon", "base"}, where, ["epsilon", "base"])
            eps = _number(spec["epsilon"], f"{where}.epsilon")
            return Contamination(eps, _state_map(space, spec["base"], f"{where}.base"))
        if kind == "belief":
            _check_keys(spec, {"kind", "focal"}, where, ["focal"])
            if not isinstance(spec["focal"], list):
                _fail(f"{where}.focal", "expected a list")
            focal = []
            for i, item in enumerate(spec["focal"]):
                loc = f"{where}.focal[{i}]"
                _check_keys(item, {"set", "mass"}, loc, ["set", "mass"])
                if not isinstance(item["set"], list):
                    _fail(f"{loc}.set", "expected a list of state labels")
                for s in item["set"]:
                    if s not in space.states:
                        _fail(f"{loc}.set", f"unknown state {s!r}")
                focal.append((space.subset(item["set"]), _number(item["mass"], f"{loc}.mass")))
            return Belief(space.size, focal)
        if kind == "interval":
            _check_keys(spec, {"kind", "lower", "upper"}, where, ["lower", "upper"])
            return Interval(
                _state_map(space, spec["lower"], f"{where}.lower"),
                _state_map(space, spec["upper"], f"{where}.upper"),
            )
        # polytope
        if ("constraints" in spec) == ("vertices" in spec):
            _fail(where, "a polytope needs exactly one of 'constraints' or 'vertices'")
        if "vertices" in spec:
            pts = [_state_map(space, v, f"{where}.vertices[{i}]") for i, v in enumerate(spec["vertices"])]
            return Polytope(CredalPolytope.from_vertices(pts))
        halfspaces = []
        for i, c in enumerate(spec["constraints"]):
            loc = f"{where}.constraints[{i}]"
            _check_keys(c, {"gamble", "bound"}, loc, ["gamble", "bound"])
            halfspaces.append((_state_map(space, c["gamble"], f"{loc}.gamble"), _number(c["bound"], f"{loc}.bound")))
        return Polytope(CredalPolytope(space.size, halfspaces))
    except DocumentError:
        raise
    except IMCError as exc:
        _fail(where, str(exc))


def parse_document(doc) -> ModelDocument:
    _check_keys(doc, {"format_version", "states", "initial", "transition", "metadata"}, "$",
                ["format_version", "states", "initial", "transition"])
    if doc["format_version"] != FORMAT_VERSION:
        _fail("$.format_version", f"unsupported version {doc['format_version']!r}; expected {FORMAT_VERSION}")
    states = doc["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        _fail("$.states", "expected a list of state labels")
    try:
        space = StateSpace(tuple(states))
    except IMCError as exc:
        _fail("$.states", str(exc))
    initial = parse_model(space, doc["initial"], "$.initial")

    def operator(spec, where):
        if not isinstance(spec, dict):
            _fail(where, "expected an object mapping each state to a model")
        missing = [s for s in space.states if s not in spec]
        if missing:
            _fail(where, f"no transition model for states {missing}")
        extra = [s for s in spec if s not in space.states]
        if extra:
            _fail(where, f"unknown state(s) {extra}")
        return UpperTransitionOperator(space, [parse_model(space, spec[s], f"{where}.{s}") for s in space.states])

    trans = doc["transition"]
    if isinstance(trans, list):
        if not trans:
            _fail("$.transition", "empty list of transition steps")
        ops = [operator(t, f"$.transition[{i}]") for i, t in enumerate(trans)]
        chain = ImpreciseMarkovChain(initial, ops)
    else:
        chain = ImpreciseMarkovChain(initial, operator(trans, "$.transition"))
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        _fail("$.metadata", "expected an object")
    return ModelDocument(chain, doc["initial"], trans, metadata)


def load_document(path) -> ModelDocument:
    return parse_document(load_json(path))


def dumps(obj) -> str:
    """Canonical JSON text: two-space indent, insertion order, trailing newline."""
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def serialize_document(doc: ModelDocument) -> str:
    return dumps(doc.to_dict())


def model_to_spec(space: StateSpace, model) -> dict:
    """JSON form of an uncertainty model (the inverse of :func:`parse_model`)."""

    def vec(v):
        return {s: float(x) for s, x in zip(space.states, v)}

    if isinstance(model, Precise):
        return {"kind": "precise", "mass": vec(model.mass)}
    if isinstance(model, Vacuous):
        return {"kind": "vacuous"}
    if isinstance(model, Contamination):
        return {"kind": "contamination", "epsilon": model.epsilon, "base": vec(model.base)}
    if isinstance(model, Belief):
        return {"kind": "belief", "focal": [{"set": space.labels(F), "mass": m} for F, m in model.focal]}
    if isinstance(model, Interval):
        return {"kind": "interval", "lower": vec(model.lower_mass), "upper": vec(model.upper_mass)}
    if isinstance(model, Polytope):
        return {
            "kind": "polytope",
            "constraints": [{"gamble": vec(g), "bound": u} for g, u in model.polytope.halfspaces],
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def chain_document(chain: ImpreciseMarkovChain, metadata=None) -> ModelDocument:
    space = chain.space

    def op_spec(op):
        return {s: model_to_spec(space, r) for s, r in zip(space.states, op.rows)}

    if chain.stationary:
        trans = op_spec(chain.stationary_operator)
    else:
        trans = [op_spec(op) for op in chain.transitions.operators]
    return ModelDocument(chain, model_to_spec(space, chain.initial), trans, dict(metadata or {}))


def parse_gamble(space: StateSpace, obj, where="$") -> np.ndarray:
    return _state_map(space, obj, where, complete=True)


def load_gamble(space: StateSpace, path) -> np.ndarray:
    return parse_gamble(space, load_json(path), str(path))


def parse_joint(space: StateSpace, obj, horizon: int, where="$") -> np.ndarray:
    """Dense map on ``X**horizon`` from ``{"default": v, "values": [{"path": [...], "value": x}]}``."""
    _check_keys(obj, {"default", "values"}, where, ["values"])
    default = _number(obj.get("default", 0.0), f"{where}.default")
    f = np.full((space.size,) * horizon, default)
    for i, item in enumerate(obj["values"]):
        loc = f"{where}.values[{i}]"
        _check_keys(item, {"path", "value"}, loc, ["path", "value"])
        path = item["path"]
        if not isinstance(path, list) or len(path) != horizon:
            _fail(f"{loc}.path", f"expected a list of {horizon} state labels")
        for s in path:
            if s not in space.states:
                _fail(f"{loc}.path", f"unknown state {s!r}")
        f[tuple(space.index(s) for s in path)] = _number(item["value"], f"{loc}.value")
    return f
