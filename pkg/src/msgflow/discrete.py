"""Exact joint distributions over (message, all edge transmissions).

The enumeration backend walks every (message, noise) realization, propagates
it through the system, and accumulates exact rational probabilities.  The
resulting table answers two kinds of queries:

* ``cmi`` — a float conditional mutual information in bits, for display;
* ``dependent`` — an exact yes/no conditional-dependence decision, made by a
  factorization test on the rational probabilities.  Flow verdicts are always
  taken from ``dependent``, never from a float threshold.

Variable identifiers are message component names (strings) and
:class:`~msgflow.graph.EdgeRef` objects.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .errors import BudgetExceededError, ValidationError
from .graph import EdgeRef
from .system import SystemSpec

VarId = Union[str, EdgeRef]

DEFAULT_BUDGET = 2 ** 24


class DiscreteJoint:
    """An exact finite joint over message components and edge transmissions."""

    def __init__(
        self,
        variables: Sequence[VarId],
        rows: Sequence[tuple],
        probs: Sequence[Fraction],
    ) -> None:
        self.variables: tuple[VarId, ...] = tuple(variables)
        self.rows: tuple[tuple, ...] = tuple(rows)
        self.probs: tuple[Fraction, ...] = tuple(probs)
        if len(self.rows) != len(self.probs):
            raise ValidationError("rows and probabilities differ in length")
        total = sum(self.probs, Fraction(0))
        if total != 1:
            raise ValidationError(f"probabilities sum to {total}, expected 1")
        if any(p < 0 for p in self.probs):
            raise ValidationError("negative probability")
        self._index = {v: i for i, v in enumerate(self.variables)}
        if len(self._index) != len(self.variables):
            raise ValidationError("duplicate variable ids")
        self.message_vars: tuple[str, ...] = tuple(
            v for v in self.variables if isinstance(v, str)
        )
        self.edge_vars: tuple[EdgeRef, ...] = tuple(
            v for v in self.variables if isinstance(v, EdgeRef)
        )
        # Integer weights on a common denominator make the CI test pure
        # integer arithmetic.
        denom = 1
        for p in self.probs:
            denom = denom * p.denominator // math.gcd(denom, p.denominator)
        self._weights = tuple(int(p * denom) for p in self.probs)
        self._edges_at: dict[int, tuple[EdgeRef, ...]] = {}
        for e in self.edge_vars:
            self._edges_at.setdefault(e.time, ())
        for t in self._edges_at:
            self._edges_at[t] = tuple(e for e in self.edge_vars if e.time == t)
        self._constant_cache: dict[VarId, bool] = {}

    # ----- variable bookkeeping ----------------------------------------

    def default_message(self, message: Optional[str] = None) -> str:
        if message is not None:
            if message not in self._index or not isinstance(message, str):
                raise ValidationError(f"unknown message variable {message!r}")
            return message
        if len(self.message_vars) != 1:
            raise ValidationError(
                f"message is ambiguous, choose one of {self.message_vars}"
            )
        return self.message_vars[0]

    def times(self) -> tuple[int, ...]:
        return tuple(sorted(self._edges_at))

    def edges_at(self, t: int) -> tuple[EdgeRef, ...]:
        return self._edges_at.get(t, ())

    def has_var(self, v: VarId) -> bool:
        return v in self._index

    def _cols(self, vars: Iterable[VarId]) -> tuple[int, ...]:
        cols = []
        for v in vars:
            if v not in self._index:
                raise ValidationError(f"unknown variable {v}")
            cols.append(self._index[v])
        return tuple(cols)

    def is_constant(self, v: VarId) -> bool:
        if v not in self._constant_cache:
            (col,) = self._cols([v])
            values = {row[col] for row in self.rows}
            self._constant_cache[v] = len(values) <= 1
        return self._constant_cache[v]

    def support(self, v: VarId) -> tuple:
        (col,) = self._cols([v])
        seen, out = set(), []
        for row in self.rows:
            if row[col] not in seen:
                seen.add(row[col])
                out.append(row[col])
        return tuple(out)

    # ----- information queries -----------------------------------------

    def _project(self, cols: tuple[int, ...]):
        rows = self.rows
        return [tuple(row[c] for c in cols) for row in rows]

    @staticmethod
    def _check_sets(a, b, c) -> None:
        sa, sb, sc = set(a), set(b), set(c)
        if sa != sb and sa & sb:
            raise ValidationError("first two variable sets must be disjoint or identical")
        if sc & (sa | sb):
            raise ValidationError("conditioning set overlaps the queried sets")

    def cmi(
        self,
        a_vars: Sequence[VarId],
        b_vars: Sequence[VarId],
        c_vars: Sequence[VarId] = (),
    ) -> float:
        """I(A;B|C) in bits.  A == B (same set) yields the conditional entropy H(A|C)."""
        self._check_sets(a_vars, b_vars, c_vars)
        if not a_vars or not b_vars:
            return 0.0
        ka = self._project(self._cols(a_vars))
        kb = self._project(self._cols(b_vars))
        kc = self._project(self._cols(c_vars))
        w_abc: dict = {}
        w_ac: dict = {}
        w_bc: dict = {}
        w_c: dict = {}
        for i, w in enumerate(self._weights):
            if w == 0:
                continue
            a, b, c = ka[i], kb[i], kc[i]
            w_abc[(a, b, c)] = w_abc.get((a, b, c), 0) + w
            w_ac[(a, c)] = w_ac.get((a, c), 0) + w
            w_bc[(b, c)] = w_bc.get((b, c), 0) + w
            w_c[c] = w_c.get(c, 0) + w
        total = sum(w_c.values())
        bits = 0.0
        for (a, b, c), w in w_abc.items():
            ratio = (w * w_c[c]) / (w_ac[(a, c)] * w_bc[(b, c)])
            if ratio != 1:
                bits += (w / total) * math.log2(ratio)
        return max(bits, 0.0)

    def dependent(
        self,
        a_vars: Sequence[VarId],
        b_vars: Sequence[VarId],
        c_vars: Sequence[VarId] = (),
    ) -> bool:
        """Exact test of I(A;B|C) > 0 by factorization of the rational table."""
        self._check_sets(a_vars, b_vars, c_vars)
        if not a_vars or not b_vars:
            return False
        if set(a_vars) == set(b_vars):
            # H(A|C) > 0 iff some conditional law is non-degenerate.
            ka = self._project(self._cols(a_vars))
            kc = self._project(self._cols(c_vars))
            seen: dict = {}
            for i, w in enumerate(self._weights):
                if w == 0:
                    continue
                prev = seen.setdefault(kc[i], ka[i])
                if prev != ka[i]:
                    return True
            return False
        ka = self._project(self._cols(a_vars))
        kb = self._project(self._cols(b_vars))
        kc = self._project(self._cols(c_vars))
        w_abc: dict = {}
        w_ac: dict = {}
        w_bc: dict = {}
        w_c: dict = {}
        for i, w in enumerate(self._weights):
            if w == 0:
                continue
            a, b, c = ka[i], kb[i], kc[i]
            w_abc[(a, b, c)] = w_abc.get((a, b, c), 0) + w
            w_ac[(a, c)] = w_ac.get((a, c), 0) + w
            w_bc[(b, c)] = w_bc.get((b, c), 0) + w
            w_c[c] = w_c.get(c, 0) + w
        for (a, b, c), w in w_abc.items():
            if w * w_c[c] != w_ac[(a, c)] * w_bc[(b, c)]:
                return True
        # Zero cells: some (a,b,c) off-support although p(a|c) and p(b|c) are
        # both positive.  Detected by counting support sizes per c-group.
        n_a: dict = {}
        n_b: dict = {}
        n_ab: dict = {}
        for (a, c) in w_ac:
            n_a[c] = n_a.get(c, 0) + 1
        for (b, c) in w_bc:
            n_b[c] = n_b.get(c, 0) + 1
        for (a, b, c) in w_abc:
            n_ab[c] = n_ab.get(c, 0) + 1
        return any(n_ab[c] != n_a[c] * n_b[c] for c in w_c)

    def entropy(self, vars: Sequence[VarId]) -> float:
        """H(vars) in bits."""
        return self.cmi(vars, vars)


def enumerate_joint(spec: SystemSpec, budget: int = DEFAULT_BUDGET) -> DiscreteJoint:
    """Build the exact joint of (message components, every edge transmission)."""
    if spec.is_gaussian:
        raise ValidationError("gaussian systems use linear_propagate, not enumeration")
    n_real = spec.realization_count()
    if n_real > budget:
        raise BudgetExceededError(
            f"{n_real} realizations exceed the enumeration budget of {budget}"
        )
    graph = spec.graph
    edge_order = tuple(e for t in range(graph.horizon) for e in graph.edges_at(t))
    variables: tuple = tuple(spec.message.components) + edge_order
    noise_nodes = spec.noise_nodes()
    noise_supports = [spec.noise[v].pmf for v in noise_nodes]

    acc: dict[tuple, Fraction] = {}
    order: list[tuple] = []
    if spec.message.kind == "discrete":
        msg_support = spec.message.pmf
    else:  # derived: message computed from the noise realization
        msg_support = (((), Fraction(1)),)
    for msg_tuple, p_msg in msg_support:
        for noise_choice in itertools.product(*noise_supports):
            p = p_msg
            noise_values = {}
            for v, (val, pv) in zip(noise_nodes, noise_choice):
                noise_values[v] = val
                p *= pv
            if spec.message.kind == "derived":
                mv = spec.message_values(noise_values)
                msg_values = {name: mv[name] for name in spec.message.components}
            else:
                msg_values = dict(zip(spec.message.components, msg_tuple))
            edge_values = spec.propagate(msg_values, noise_values)
            outcome = tuple(msg_values[n] for n in spec.message.components) + tuple(
                edge_values[e] for e in edge_order
            )
            if outcome not in acc:
                order.append(outcome)
                acc[outcome] = p
            else:
                acc[outcome] += p
    return DiscreteJoint(variables, order, [acc[o] for o in order])
