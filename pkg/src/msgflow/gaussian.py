"""Linear-Gaussian joint distributions.

For systems whose node functions are all affine and whose message and noise
are scalar Gaussians, every transmission is a rational linear combination of
the base variables (message, intrinsic noises).  The joint is then fully
described by a mean vector and covariance matrix, both kept in exact rational
arithmetic.

Conditional variances are computed by solving the (possibly singular, always
consistent) normal equations with exact fraction elimination, so "variance is
exactly zero" — the noiseless-recovery case that makes mutual information
infinite — is decided without any tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import NonAffineError, ValidationError
from .exprs import AffineForm, affine_form
from .graph import EdgeRef
from .system import SystemSpec

VarId = Union[str, EdgeRef]


def _solve_psd(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve ``mat @ x = rhs`` exactly for a PSD Gram matrix.

    The system is consistent whenever ``rhs`` lies in the range of ``mat``
    (always true for covariance blocks of a joint law); free coordinates are
    set to zero.
    """
    n = len(mat)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    pivots: list[tuple[int, int]] = []
    row = 0
    for col in range(n):
        pivot = next((r for r in range(row, n) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[row], a[pivot] = a[pivot], a[row]
        pv = a[row][col]
        a[row] = [x / pv for x in a[row]]
        for r in range(n):
            if r != row and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[row])]
        pivots.append((row, col))
        row += 1
        if row == n:
            break
    for r in range(row, n):
        if a[r][n] != 0:
            raise ValidationError("inconsistent covariance system; matrix is not PSD")
    x = [Fraction(0)] * n
    for r, c in pivots:
        x[c] = a[r][n]
    return x


class GaussianJoint:
    """Mean and covariance over (message, edge transmissions), exact rationals."""

    def __init__(
        self,
        variables: Sequence[VarId],
        mean: Sequence[Fraction],
        cov: Sequence[Sequence[Fraction]],
        coeffs: Optional[dict] = None,
    ) -> None:
        self.variables: tuple[VarId, ...] = tuple(variables)
        self.mean: tuple[Fraction, ...] = tuple(Fraction(m) for m in mean)
        self.cov: tuple[tuple[Fraction, ...], ...] = tuple(
            tuple(Fraction(x) for x in row) for row in cov
        )
        n = len(self.variables)
        if len(self.mean) != n or len(self.cov) != n:
            raise ValidationError("mean/covariance shape mismatch")
        for i in range(n):
            for j in range(i, n):
                if self.cov[i][j] != self.cov[j][i]:
                    raise ValidationError("covariance must be symmetric")
        self._index = {v: i for i, v in enumerate(self.variables)}
        self.message_vars: tuple[str, ...] = tuple(
            v for v in self.variables if isinstance(v, str)
        )
        self.edge_vars: tuple[EdgeRef, ...] = tuple(
            v for v in self.variables if isinstance(v, EdgeRef)
        )
        self.coeffs = coeffs or {}
        self._cond_cache: dict = {}

    # Shared surface with DiscreteJoint -----------------------------------

    def default_message(self, message: Optional[str] = None) -> str:
        if message is not None:
            if not isinstance(message, str) or message not in self._index:
                raise ValidationError(f"unknown message variable {message!r}")
            return message
        if len(self.message_vars) != 1:
            raise ValidationError("message is ambiguous")
        return self.message_vars[0]

    def times(self) -> tuple[int, ...]:
        return tuple(sorted({e.time for e in self.edge_vars}))

    def edges_at(self, t: int) -> tuple[EdgeRef, ...]:
        return tuple(e for e in self.edge_vars if e.time == t)

    def has_var(self, v: VarId) -> bool:
        return v in self._index

    def is_constant(self, v: VarId) -> bool:
        i = self._require(v)
        return self.cov[i][i] == 0

    def _require(self, v: VarId) -> int:
        if v not in self._index:
            raise ValidationError(f"unknown variable {v}")
        return self._index[v]

    def variance(self, v: VarId) -> Fraction:
        i = self._require(v)
        return self.cov[i][i]

    def covariance(self, u: VarId, v: VarId) -> Fraction:
        return self.cov[self._require(u)][self._require(v)]

    def cond_var(self, v: VarId, given: Sequence[VarId] = ()) -> Fraction:
        """Exact Var(v | given)."""
        i = self._require(v)
        cols = tuple(sorted(self._require(g) for g in set(given)))
        key = (i, cols)
        if key in self._cond_cache:
            return self._cond_cache[key]
        if not cols:
            out = self.cov[i][i]
        else:
            sub = [[self.cov[r][c] for c in cols] for r in cols]
            rhs = [self.cov[r][i] for r in cols]
            x = _solve_psd(sub, rhs)
            out = self.cov[i][i] - sum(r * xi for r, xi in zip(rhs, x))
        self._cond_cache[key] = out
        return out

    def dependent(
        self,
        a_vars: Sequence[VarId],
        b_vars: Sequence[VarId],
        c_vars: Sequence[VarId] = (),
    ) -> bool:
        """Exact test of I(a; B | C) > 0 for a scalar first argument."""
        a = self._scalar_first(a_vars)
        if not b_vars:
            return False
        v1 = self.cond_var(a, tuple(c_vars))
        v2 = self.cond_var(a, tuple(c_vars) + tuple(b_vars))
        return v2 < v1

    def cmi(
        self,
        a_vars: Sequence[VarId],
        b_vars: Sequence[VarId],
        c_vars: Sequence[VarId] = (),
    ) -> float:
        """I(a; B | C) in bits for a scalar first argument; may be +inf."""
        a = self._scalar_first(a_vars)
        if not b_vars:
            return 0.0
        v1 = self.cond_var(a, tuple(c_vars))
        v2 = self.cond_var(a, tuple(c_vars) + tuple(b_vars))
        if v1 == v2:
            return 0.0
        if v2 == 0:
            return math.inf
        return 0.5 * math.log2(v1 / v2)

    def _scalar_first(self, a_vars: Sequence[VarId]) -> VarId:
        a_vars = tuple(a_vars)
        if len(a_vars) != 1:
            raise ValidationError(
                "the gaussian backend computes information about a scalar variable only"
            )
        return a_vars[0]


def linear_propagate(spec: SystemSpec) -> GaussianJoint:
    """Exact second-order propagation through an affine system.

    Each transmission is reduced to an affine form over the base variables
    (the scalar message and every declared intrinsic noise); the covariance is
    assembled from those coefficient rows and the base variances.
    """
    if not spec.is_gaussian:
        raise ValidationError("linear_propagate needs a gaussian message")
    for v, ns in spec.noise.items():
        if ns.kind != "gaussian":
            raise ValidationError(f"noise at {v} is not gaussian")
    msg_name = spec.message.components[0]
    base: list = [("msg", msg_name)] + [("noise", v) for v in spec.noise_nodes()]
    base_var = {("msg", msg_name): spec.message.variance}
    for v in spec.noise_nodes():
        base_var[("noise", v)] = spec.noise[v].variance

    graph = spec.graph
    env: dict[EdgeRef, AffineForm] = {}
    edge_order = tuple(e for t in range(graph.horizon) for e in graph.edges_at(t))
    for t in range(graph.horizon):
        for v in graph.nodes_at(t):
            for e in graph.outgoing(v):
                try:
                    env[e] = affine_form(spec.expr_for(e), env, v, sole_msg=msg_name)
                except NonAffineError as exc:
                    raise NonAffineError(f"edge {e}: {exc}") from exc

    variables: tuple = (msg_name,) + edge_order
    msg_row = {("msg", msg_name): Fraction(1)}
    rows = [msg_row] + [env[e].coeff_map() for e in edge_order]
    consts = [Fraction(0)] + [env[e].constant for e in edge_order]
    n = len(variables)
    cov = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        ri = rows[i]
        for j in range(i, n):
            rj = rows[j]
            small, big = (ri, rj) if len(ri) <= len(rj) else (rj, ri)
            s = Fraction(0)
            for k, ci in small.items():
                cj = big.get(k)
                if cj is not None:
                    s += ci * cj * base_var[k]
            cov[i][j] = cov[j][i] = s
    coeffs = {var: rows[i] for i, var in enumerate(variables)}
    return GaussianJoint(variables, consts, cov, coeffs=coeffs)
