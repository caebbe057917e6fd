"""System descriptions: graph + message law + intrinsic noise + node functions.

A system fixes, for every node of the unrolled graph, one expression per
outgoing edge.  At times >= 1 an expression may read the node's incoming
transmissions and its own intrinsic variable; at time 0 it may instead read
the message, but only at declared input nodes.  Edges without an expression
carry the constant 0, which is how sparse figures embed into the complete
graph.

Message laws come in three kinds:

* ``discrete`` — named components with an exact joint pmf over value tuples;
* ``gaussian`` — a single zero-mean scalar component with rational variance;
* ``derived``  — components defined as expressions over intrinsic variables,
  for systems whose message lives at the output rather than the input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from . import exprs
from .errors import SpecParseError, ValidationError
from .exprs import EvalEnv, Expr, compile_expr, expr_to_json, leaf_refs, parse_expr
from .graph import EdgeRef, NodeRef, UnrolledGraph
from .values import Value, value_from_json, value_to_json

Pmf = tuple  # tuple of (value tuple, Fraction) pairs, order-preserving


def _normalize_pmf(pairs, what: str) -> Pmf:
    out = []
    total = Fraction(0)
    seen = set()
    for value, p in pairs:
        p = Fraction(p)
        if p < 0:
            raise ValidationError(f"{what}: negative probability for {value!r}")
        if p == 0:
            continue
        if value in seen:
            raise ValidationError(f"{what}: duplicate support value {value!r}")
        seen.add(value)
        out.append((value, p))
        total += p
    if total != 1:
        raise ValidationError(f"{what}: probabilities sum to {total}, expected 1")
    return tuple(out)


@dataclass(frozen=True)
class MessageSpec:
    kind: str  # "discrete" | "gaussian" | "derived"
    components: tuple[str, ...]
    pmf: Optional[Pmf] = None  # discrete: ((component values...), prob)
    variance: Optional[Fraction] = None  # gaussian
    exprs: Optional[tuple[Expr, ...]] = None  # derived, one per component

    @staticmethod
    def discrete(components, pmf) -> "MessageSpec":
        components = tuple(components)
        norm = _normalize_pmf(
            (((tuple(v) if isinstance(v, (list, tuple)) else (v,)), p) for v, p in pmf),
            "message",
        )
        for v, _ in norm:
            if len(v) != len(components):
                raise ValidationError(
                    f"message value {v!r} does not match components {components}"
                )
        return MessageSpec("discrete", components, pmf=norm)

    @staticmethod
    def bernoulli(name: str = "M", p=Fraction(1, 2)) -> "MessageSpec":
        p = Fraction(p)
        return MessageSpec.discrete((name,), (((0,), 1 - p), ((1,), p)))

    @staticmethod
    def gaussian(name: str = "M", variance=1) -> "MessageSpec":
        variance = Fraction(variance)
        if variance <= 0:
            raise ValidationError("gaussian message needs positive variance")
        return MessageSpec("gaussian", (name,), variance=variance)

    @staticmethod
    def derived(components, component_exprs) -> "MessageSpec":
        return MessageSpec("derived", tuple(components), exprs=tuple(component_exprs))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str  # "discrete" | "gaussian"
    pmf: Optional[Pmf] = None
    variance: Optional[Fraction] = None

    @staticmethod
    def discrete(pmf) -> "NoiseSpec":
        return NoiseSpec("discrete", pmf=_normalize_pmf(pmf, "noise"))

    @staticmethod
    def bernoulli(p=Fraction(1, 2)) -> "NoiseSpec":
        p = Fraction(p)
        return NoiseSpec.discrete(((0, 1 - p), (1, p)))

    @staticmethod
    def gaussian(variance) -> "NoiseSpec":
        variance = Fraction(variance)
        if variance <= 0:
            raise ValidationError("gaussian noise needs positive variance")
        return NoiseSpec("gaussian", variance=variance)


class SystemSpec:
    """An immutable, validated computational system."""

    def __init__(
        self,
        graph: UnrolledGraph,
        message: MessageSpec,
        noise: Mapping[NodeRef, NoiseSpec] = (),
        functions: Mapping[NodeRef, Mapping[EdgeRef, Expr]] = (),
        declared_inputs: tuple[str, ...] = (),
    ) -> None:
        self.graph = graph
        self.message = message
        self.noise: dict[NodeRef, NoiseSpec] = dict(noise)
        self.functions: dict[NodeRef, dict[EdgeRef, Expr]] = {
            v: dict(fs) for v, fs in dict(functions).items()
        }
        self.declared_inputs: frozenset[str] = frozenset(declared_inputs)
        self._validate()
        self._compiled = None

    # ----- validation -------------------------------------------------

    def _validate(self) -> None:
        g = self.graph
        if len(set(self.message.components)) != len(self.message.components):
            raise ValidationError("duplicate message component names")
        for name in self.declared_inputs:
            if name not in g.node_names:
                raise ValidationError(f"declared input {name!r} is not a node")
        if self.message.kind == "derived" and self.declared_inputs:
            raise ValidationError("derived messages cannot also enter at input nodes")
        for v, ns in self.noise.items():
            if v not in g:
                raise ValidationError(f"noise declared at unknown node {v}")
            if ns.kind == "gaussian" and self.message.kind == "discrete":
                raise ValidationError("cannot mix gaussian noise with a discrete message")
            if ns.kind == "discrete" and self.message.kind == "gaussian":
                raise ValidationError("cannot mix discrete noise with a gaussian message")
        for v, fns in self.functions.items():
            if v not in g:
                raise ValidationError(f"function declared at unknown node {v}")
            out = set(g.outgoing(v))
            inc = set(g.incoming(v))
            for e, expr in fns.items():
                if e not in out:
                    raise ValidationError(f"{v} has no outgoing edge {e}")
                self._check_leaves(v, e, expr, inc)
        if self.message.kind == "derived":
            for expr in self.message.exprs or ():
                for kind, payload in leaf_refs(expr):
                    if kind != "noise" or payload is None:
                        raise ValidationError(
                            "derived message expressions may only read named intrinsic variables"
                        )
                    if payload not in g:
                        raise ValidationError(f"derived message reads unknown node {payload}")

    def _check_leaves(self, v: NodeRef, e: EdgeRef, expr: Expr, incoming: set) -> None:
        for kind, payload in leaf_refs(expr):
            if kind == "edge":
                if payload not in incoming:
                    raise ValidationError(
                        f"function for {e} reads {payload}, not an incoming edge of {v}"
                    )
            elif kind == "noise":
                if payload is not None and payload != v:
                    raise ValidationError(
                        f"function for {e} reads intrinsic variable of another node {payload}"
                    )
            elif kind == "msg":
                if v.time != 0 or v.name not in self.declared_inputs:
                    raise ValidationError(
                        f"function for {e} reads the message but {v} is not a declared input"
                    )
                if payload is not None and payload not in self.message.components:
                    raise ValidationError(f"unknown message component {payload!r}")

    # ----- structural queries ------------------------------------------

    @property
    def is_gaussian(self) -> bool:
        return self.message.kind == "gaussian"

    def expr_for(self, e: EdgeRef) -> Expr:
        return self.functions.get(e.src, {}).get(e, exprs.CONST_ZERO)

    def noise_nodes(self) -> tuple[NodeRef, ...]:
        return tuple(sorted(self.noise))

    def realization_count(self) -> int:
        """Number of (message, noise) realizations the exact engine enumerates."""
        if self.message.kind == "gaussian":
            raise ValidationError("gaussian systems are not enumerable")
        n = len(self.message.pmf) if self.message.kind == "discrete" else 1
        for ns in self.noise.values():
            n *= len(ns.pmf)
        return n

    # ----- propagation --------------------------------------------------

    def _compile(self):
        if self._compiled is None:
            plan = []
            for t in range(self.graph.horizon):
                for v in self.graph.nodes_at(t):
                    fns = self.functions.get(v)
                    if not fns:
                        continue
                    for e in self.graph.outgoing(v):
                        if e in fns:
                            plan.append((v, e, compile_expr(fns[e])))
            msg_fns = None
            if self.message.kind == "derived":
                msg_fns = tuple(compile_expr(x) for x in self.message.exprs)
            self._compiled = (tuple(plan), msg_fns)
        return self._compiled

    def message_values(self, noise_values: Mapping[NodeRef, Value]) -> dict[str, Value]:
        """Message components of one realization (derived kinds read the noise)."""
        _, msg_fns = self._compile()
        if msg_fns is None:
            raise ValidationError("message_values is only for derived messages")
        env = EvalEnv(edges={}, noise_values=dict(noise_values))
        return {
            name: fn(env) for name, fn in zip(self.message.components, msg_fns)
        }

    def propagate(
        self,
        msg_values: Mapping[str, Value],
        noise_values: Mapping[NodeRef, Value],
    ) -> dict[EdgeRef, Value]:
        """Forward pass: every edge transmission of one realization."""
        plan, _ = self._compile()
        out: dict[EdgeRef, Value] = {e: 0 for e in self.graph.edges}
        env = EvalEnv(edges=out, msg_values=dict(msg_values))
        for v, e, fn in plan:
            env.own_noise = noise_values.get(v, 0)
            out[e] = fn(env)
        return out

    # ----- JSON ----------------------------------------------------------

    def to_json_dict(self) -> dict:
        g = self.graph
        d: dict = {
            "nodes": list(g.node_names),
            "horizon": g.horizon,
            "adjacency": "complete" if g.is_complete else sorted(map(list, g.base_edges)),
            "message": _message_to_json(self.message),
            "noise": {
                str(v): _noise_to_json(ns) for v, ns in sorted(self.noise.items())
            },
            "functions": {
                str(v): {
                    str(e.dst): expr_to_json(expr) for e, expr in sorted(fns.items())
                }
                for v, fns in sorted(self.functions.items())
            },
            "declared_inputs": sorted(self.declared_inputs),
        }
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "SystemSpec":
        if not isinstance(d, dict):
            raise ValidationError("system spec must be a JSON object")
        missing = {"nodes", "horizon", "message", "functions"} - set(d)
        if missing:
            raise ValidationError(f"system spec missing fields: {sorted(missing)}")
        adjacency = d.get("adjacency", "complete")
        graph = UnrolledGraph(
            d["nodes"],
            d["horizon"],
            None if adjacency == "complete" else [tuple(p) for p in adjacency],
        )
        message = _message_from_json(d["message"])
        noise = {
            NodeRef.parse(k): _noise_from_json(v)
            for k, v in d.get("noise", {}).items()
        }
        functions: dict[NodeRef, dict[EdgeRef, Expr]] = {}
        for node_id, fns in d["functions"].items():
            v = NodeRef.parse(node_id)
            functions[v] = {}
            for dst_id, ex in fns.items():
                dst = NodeRef.parse(dst_id)
                if dst.time != v.time + 1:
                    raise ValidationError(
                        f"function key {dst_id!r} under {node_id!r} is not at time {v.time + 1}"
                    )
                functions[v][EdgeRef(v, dst)] = parse_expr(ex)
        return SystemSpec(
            graph,
            message,
            noise=noise,
            functions=functions,
            declared_inputs=tuple(d.get("declared_inputs", ())),
        )


def _message_to_json(m: MessageSpec) -> dict:
    if m.kind == "discrete":
        return {
            "kind": "discrete",
            "components": list(m.components),
            "pmf": [
                {"value": [value_to_json(x) for x in v], "p": [p.numerator, p.denominator]}
                for v, p in m.pmf
            ],
        }
    if m.kind == "gaussian":
        return {
            "kind": "gaussian",
            "components": list(m.components),
            "variance": [m.variance.numerator, m.variance.denominator],
        }
    return {
        "kind": "derived",
        "components": list(m.components),
        "exprs": [expr_to_json(x) for x in m.exprs],
    }


def _message_from_json(d: dict) -> MessageSpec:
    kind = d.get("kind")
    if kind == "discrete":
        pmf = [
            (tuple(value_from_json(x) for x in row["value"]), Fraction(*row["p"]))
            for row in d["pmf"]
        ]
        return MessageSpec.discrete(d["components"], pmf)
    if kind == "gaussian":
        if len(d["components"]) != 1:
            raise ValidationError("gaussian messages are scalar")
        return MessageSpec.gaussian(d["components"][0], Fraction(*d["variance"]))
    if kind == "derived":
        return MessageSpec.derived(
            d["components"], [parse_expr(x) for x in d["exprs"]]
        )
    raise ValidationError(f"unknown message kind {kind!r}")


def _noise_to_json(ns: NoiseSpec) -> dict:
    if ns.kind == "discrete":
        return {
            "kind": "discrete",
            "pmf": [
                {"value": value_to_json(v), "p": [p.numerator, p.denominator]}
                for v, p in ns.pmf
            ],
        }
    return {"kind": "gaussian", "variance": [ns.variance.numerator, ns.variance.denominator]}


def _noise_from_json(d: dict) -> NoiseSpec:
    kind = d.get("kind")
    if kind == "discrete":
        return NoiseSpec.discrete(
            [(value_from_json(row["value"]), Fraction(*row["p"])) for row in d["pmf"]]
        )
    if kind == "gaussian":
        return NoiseSpec.gaussian(Fraction(*d["variance"]))
    raise ValidationError(f"unknown noise kind {kind!r}")


def load_system(path) -> SystemSpec:
    """Read a SystemSpec JSON file."""
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON in {path}: {exc}") from exc
    return SystemSpec.from_json_dict(d)


def save_system(spec: SystemSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
