"""Ex-ante constrained item pricing, its supergradients, and convex decomposition.

The single-buyer constrained revenue SRev(d, x) is an LP over mixture weights
on the buyer's vertex pricings: maximize expected revenue subject to the
expected allocation staying below ``x``.  The multi-buyer relaxation shares
one allocation budget of 1 per item across all buyers in a single joint LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .errors import DimensionError, GuardError, InfeasibleError
from .lp import EQ, LE, LinearProgram, LPSolution, lp_solve
from .model import (
    INF,
    Instance,
    RandomItemPricing,
    TypeDistribution,
    allocation_vector,
    dot,
    expected_revenue,
    full_availability,
    restrict,
    vec,
)
from .pricing import DEFAULT_GUARD, VertexPricing, enumerate_vertex_pricings

DECOMPOSE_GUARD = 4096


@dataclass
class ConstrainedRevenue:
    pricing: RandomItemPricing
    revenue: Fraction
    allocation: tuple
    duals: tuple  # shadow price of each item's allocation constraint
    lp: LPSolution = field(repr=False)
    program: LinearProgram | None = field(repr=False, default=None)

    def __iter__(self):
        # unpacks as (pricing, revenue)
        return iter((self.pricing, self.revenue))


def _mixture(vertices, weights) -> RandomItemPricing:
    atoms = [(vp.pricing, w) for vp, w in zip(vertices, weights) if w != 0]
    return RandomItemPricing(tuple(atoms))


def exante_srev(d: TypeDistribution, x, guard: int = DEFAULT_GUARD,
                vertices: list[VertexPricing] | None = None) -> ConstrainedRevenue:
    """Best random item pricing whose expected allocation is at most ``x``."""
    x = vec(x)
    m = d.m
    if len(x) != m:
        raise DimensionError("allocation bound has the wrong length")
    if any(xj < 0 or xj > 1 for xj in x):
        raise ValueError("allocation bound must lie in [0, 1]^m")
    if vertices is None:
        vertices = enumerate_vertex_pricings(d, guard=guard)
    K = len(vertices)
    A = [[vp.allocation[j] for vp in vertices] for j in range(m)]
    A.append([1] * K)
    lp = LinearProgram(
        c=[vp.revenue for vp in vertices],
        A=A,
        rel=[LE] * m + [EQ],
        b=list(x) + [1],
    )
    sol = lp_solve(lp)
    w = sol.x
    alloc = tuple(sum((wk * vp.allocation[j] for wk, vp in zip(w, vertices)), Fraction(0)) for j in range(m))
    return ConstrainedRevenue(_mixture(vertices, w), sol.value, alloc, tuple(sol.duals[:m]), sol, lp)


@dataclass
class Supergradient:
    costs: tuple
    value: Fraction
    checks: list  # (y, SRev(y), SRev(x0) + c.(y - x0), holds)

    @property
    def ok(self) -> bool:
        return all(c >= 0 for c in self.costs) and all(ch[3] for ch in self.checks)


def srev_subgradient(d: TypeDistribution, x0, points=None, guard: int = DEFAULT_GUARD,
                     vertices: list[VertexPricing] | None = None) -> Supergradient:
    """Dual prices of the allocation constraints, checked as a supergradient at ``points``."""
    x0 = vec(x0)
    if vertices is None:
        vertices = enumerate_vertex_pricings(d, guard=guard)
    base = exante_srev(d, x0, vertices=vertices)
    c = base.duals
    if points is None:
        points = [(Fraction(0),) * d.m, x0, (Fraction(1),) * d.m]
    checks = []
    for y in points:
        y = vec(y)
        lhs = exante_srev(d, y, vertices=vertices).revenue
        rhs = base.revenue + dot(c, [a - b for a, b in zip(y, x0)])
        checks.append((y, lhs, rhs, lhs <= rhs))
    return Supergradient(c, base.revenue, checks)


@dataclass
class ExAnteSolution:
    pricings: list  # RandomItemPricing per buyer
    allocations: list  # x_i per buyer
    revenues: list
    total: Fraction
    lp: LPSolution = field(repr=False, default=None)
    program: LinearProgram | None = field(repr=False, default=None)


def exante_global(inst: Instance, guard: int = DEFAULT_GUARD) -> ExAnteSolution:
    """Optimal per-buyer random item pricings under a shared ex-ante budget of 1 per item."""
    m, n = inst.m, inst.n
    verts = [enumerate_vertex_pricings(d, guard=guard) for d in inst.buyers]
    cols = [(i, vp) for i in range(n) for vp in verts[i]]
    A, rel, b = [], [], []
    for i in range(n):
        A.append([1 if ci == i else 0 for ci, _ in cols])
        rel.append(EQ)
        b.append(1)
    for j in range(m):
        A.append([vp.allocation[j] for _, vp in cols])
        rel.append(LE)
        b.append(1)
    program = LinearProgram([vp.revenue for _, vp in cols], A, rel, b)
    sol = lp_solve(program)
    pricings, allocs, revs = [], [], []
    for i in range(n):
        ws = [(vp, w) for (ci, vp), w in zip(cols, sol.x) if ci == i]
        pricings.append(_mixture([vp for vp, _ in ws], [w for _, w in ws]))
        allocs.append(tuple(sum((w * vp.allocation[j] for vp, w in ws), Fraction(0)) for j in range(m)))
        revs.append(sum((w * vp.revenue for vp, w in ws), Fraction(0)))
    return ExAnteSolution(pricings, allocs, revs, sol.value, sol, program)


@dataclass
class Decomposition:
    pricing: RandomItemPricing  # mixture of restrictions of p
    weights: dict  # item-subset mask -> weight (positive weights only)
    points: dict  # mask -> expected allocation of p restricted to that subset
    allocation: tuple  # re-evaluated expected allocation of the mixture
    revenue: Fraction  # re-evaluated expected revenue of the mixture
    target: tuple
    target_revenue: Fraction  # y . p

    @property
    def exact(self) -> bool:
        return self.allocation == self.target and self.revenue == self.target_revenue


def _subsets(items):
    for r in range(len(items) + 1):
        for combo in combinations(items, r):
            mask = 0
            for j in combo:
                mask |= 1 << j
            yield mask


def convex_decompose(p, d: TypeDistribution, S_dist=None, y=None, guard: int = DECOMPOSE_GUARD) -> Decomposition:
    """Random restriction of ``p`` whose expected allocation is exactly ``y``.

    Every atom charges ``p_j`` whenever it sells item ``j``, so the mixture's
    revenue is exactly ``y . p``.  Raises InfeasibleError when ``y`` is not
    below the expected allocation of ``p`` under ``S_dist``.
    """
    m = d.m
    S_dist = S_dist if S_dist is not None else full_availability(m)
    y = vec(y)
    if len(p) != m or len(y) != m:
        raise DimensionError("pricing, target and distribution must agree on m")
    support = [j for j in range(m) if p[j] != INF]
    if 2 ** len(support) > guard:
        raise GuardError(f"2^{len(support)} subsets exceed guard {guard}")
    full = sum(1 << j for j in support)
    x_star = allocation_vector(d, p, S_dist)
    bad = [j for j in range(m) if y[j] < 0 or y[j] > x_star[j]]
    if bad:
        raise InfeasibleError(f"target exceeds the available allocation on items {bad}")
    masks = list(_subsets(support))
    points = {T: allocation_vector(d, restrict(p, T), S_dist) for T in masks}
    A = [[points[T][j] for T in masks] for j in support]
    A.append([1] * len(masks))
    obj = [1 if T == full else 0 for T in masks]
    sol = lp_solve(LinearProgram(obj, A, [EQ] * (len(support) + 1), [y[j] for j in support] + [1]))
    weights = {T: w for T, w in zip(masks, sol.x) if w != 0}
    mix = RandomItemPricing(tuple((restrict(p, T), w) for T, w in weights.items()))
    dec = Decomposition(
        pricing=mix,
        weights=weights,
        points=points,
        allocation=allocation_vector(d, mix, S_dist),
        revenue=expected_revenue(d, mix, S_dist),
        target=y,
        target_revenue=sum((y[j] * p[j] for j in support), Fraction(0)),
    )
    return dec
