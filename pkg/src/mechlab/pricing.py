"""Exact optimal item pricing for one finite-support unit-demand buyer.

For a fixed choice mapping (type -> item or nothing) the constraints on the
price vector are all of the form ``p_j - p_k <= const``, ``p_j <= const`` or
``p_j >= const``.  Such a system has a componentwise-largest solution given by
shortest-path distances from a zero-price reference node, and that solution
maximizes every non-negatively weighted objective, revenue and profit
included.  So each mapping's LP is solved by Floyd-Warshall instead of a
simplex call.  Items no type is mapped to are withheld (price ``INF``).

All search arithmetic runs on integers after scaling values and costs by the
common denominator; results are converted back to Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import GuardError
from .model import INF, TypeDistribution, full_mask, vec

DEFAULT_GUARD = 2_000_000


@dataclass(frozen=True)
class VertexPricing:
    pricing: tuple
    mapping: tuple  # chosen item (or None) per type, under seller-favoring ties
    revenue: Fraction
    allocation: tuple
    profit: Fraction | None = None

    @property
    def objective(self) -> Fraction:
        return self.revenue if self.profit is None else self.profit


def _lcm_den(xs) -> int:
    out = 1
    for x in xs:
        out = math.lcm(out, x.denominator)
    return out


class _Scaled:
    """Integer image of a distribution (and optional costs)."""

    def __init__(self, d: TypeDistribution, costs=None):
        self.m = d.m
        self.with_costs = costs is not None
        costs = vec(costs) if costs is not None else (Fraction(0),) * self.m
        self.vscale = _lcm_den([x for v in d.values for x in v] + list(costs))
        self.pscale = _lcm_den(d.probs)
        self.V = [[int(x * self.vscale) for x in v] for v in d.values]
        self.C = [int(c * self.vscale) for c in costs]
        self.P = [int(p * self.pscale) for p in d.probs]

    def evaluate(self, p):
        """Seller-favoring best responses at integer prices ``p`` (None = withheld)."""
        m, C = self.m, self.C
        mapping, alloc = [], [0] * m
        rev = prof = 0
        for v, w in zip(self.V, self.P):
            best, key = None, (0, 0, 0, 0, 0)
            for j in range(m):
                pj = p[j]
                if pj is None:
                    continue
                u = v[j] - pj
                if u < 0:
                    continue
                k = (u, pj - C[j], pj, 1, -j)
                if k > key:
                    best, key = j, k
            mapping.append(best)
            if best is not None:
                alloc[best] += w
                rev += w * p[best]
                prof += w * (p[best] - C[best])
        return tuple(mapping), alloc, rev, prof

    def vertex(self, p) -> VertexPricing:
        mapping, alloc, rev, prof = self.evaluate(p)
        s, ps = self.vscale, self.pscale
        return VertexPricing(
            pricing=tuple(INF if x is None else Fraction(x, s) for x in p),
            mapping=mapping,
            revenue=Fraction(rev, s * ps),
            allocation=tuple(Fraction(a, ps) for a in alloc),
            profit=Fraction(prof, s * ps) if self.with_costs else None,
        )


class _MappingSearch:
    """Depth-first search over choice mappings with difference-constraint pruning."""

    def __init__(self, sc: _Scaled, candidates, order):
        self.sc = sc
        self.cand = candidates
        self.order = order
        m = sc.m
        self.U = [None] * m  # upper bound on p_j from types mapped to j
        self.E = [[None] * m for _ in range(m)]  # E[k][j] bounds p_j - p_k
        self.L = list(sc.C)  # lower bounds on p_j

    def prices(self):
        """Largest feasible prices for the current partial mapping, or False."""
        opened = [j for j in range(self.sc.m) if self.U[j] is not None]
        k = len(opened) + 1
        big = None
        d = [[big] * k for _ in range(k)]
        for a in range(k):
            d[a][a] = 0
        for a, j in enumerate(opened, 1):
            d[0][a] = self.U[j]
            d[a][0] = -self.L[j]
            for b, i in enumerate(opened, 1):
                if a != b and self.E[i][j] is not None:
                    d[b][a] = self.E[i][j]
        for mid in range(k):
            dm = d[mid]
            for a in range(k):
                dam = d[a][mid]
                if dam is None:
                    continue
                da = d[a]
                for b in range(k):
                    x = dm[b]
                    if x is not None and (da[b] is None or dam + x < da[b]):
                        da[b] = dam + x
        if any(d[a][a] < 0 for a in range(k)):
            return False
        p = [None] * self.sc.m
        for a, j in enumerate(opened, 1):
            p[j] = d[0][a]
        return p

    def assign(self, t, j):
        """Apply type t -> j (None for no purchase); returns an undo record."""
        v = self.sc.V[t]
        if j is None:
            undo = ("L", list(self.L))
            self.L = [max(a, b) for a, b in zip(self.L, v)]
            return undo
        undo = ("T", j, self.U[j], [row[j] for row in self.E])
        self.U[j] = v[j] if self.U[j] is None else min(self.U[j], v[j])
        for k in range(self.sc.m):
            if k != j:
                w = v[j] - v[k]
                cur = self.E[k][j]
                self.E[k][j] = w if cur is None else min(cur, w)
        return undo

    def undo(self, rec):
        if rec[0] == "L":
            self.L = rec[1]
        else:
            _, j, u, col = rec
            self.U[j] = u
            for k in range(self.sc.m):
                self.E[k][j] = col[k]


def _mapping_count(candidates) -> int:
    n = 1
    for c in candidates:
        n *= len(c)
    return n


def enumerate_vertex_pricings(d: TypeDistribution, costs=None, guard: int = DEFAULT_GUARD,
                              dedupe: bool = True) -> list[VertexPricing]:
    """Optimal pricing of every feasible choice mapping, re-evaluated under real ties.

    With ``dedupe`` only the best pricing per distinct allocation vector is kept.
    """
    m = d.m
    if (m + 1) ** len(d) > guard:
        raise GuardError(f"(m+1)^support = {(m + 1) ** len(d)} exceeds guard {guard}")
    sc = _Scaled(d, costs)
    cand = [[None] + list(range(m)) for _ in range(len(d))]
    search = _MappingSearch(sc, cand, list(range(len(d))))
    found: list = []

    def rec(level):
        p = search.prices()
        if p is False:
            return
        if level == len(d):
            found.append(p)
            return
        t = search.order[level]
        for j in cand[t]:
            u = search.assign(t, j)
            rec(level + 1)
            search.undo(u)

    rec(0)
    out = [sc.vertex(p) for p in found]
    if not dedupe:
        return out
    best: dict = {}
    for vp in out:
        cur = best.get(vp.allocation)
        if cur is None or vp.objective > cur.objective:
            best[vp.allocation] = vp
    return list(best.values())


def opt_item_pricing(d: TypeDistribution, costs=None, guard: int = DEFAULT_GUARD) -> VertexPricing:
    """Revenue-optimal (or, with ``costs``, profit-optimal) deterministic item pricing.

    Branch and bound over choice mappings.  Some optimal pricing withholds
    every item it would sell at a margin <= 0 (withholding only diverts buyers
    to other non-negative-margin items or to nothing), so a type is only ever
    mapped to items it values strictly above cost.
    """
    m = d.m
    sc = _Scaled(d, costs)
    T = len(d)
    cand = []
    for t in range(T):
        items = [j for j in range(m) if sc.V[t][j] > sc.C[j]]
        items.sort(key=lambda j: sc.C[j] - sc.V[t][j])
        cand.append(items)
    count = _mapping_count([c + [None] for c in cand])
    if count > guard:
        raise GuardError(f"restricted mapping count {count} exceeds guard {guard}")

    def potential(t):
        return sc.P[t] * max((sc.V[t][j] - sc.C[j] for j in cand[t]), default=0)

    order = sorted((t for t in range(T) if cand[t]), key=lambda t: -potential(t))
    search = _MappingSearch(sc, [c + [None] for c in cand], order)
    assigned: list = [None] * T
    C = sc.C

    best_p = [None] * m
    best_val = 0  # withholding everything

    def objective(p):
        _, _, rev, prof = sc.evaluate(p)
        return prof

    def rec(level):
        nonlocal best_p, best_val
        p = search.prices()
        if p is False:
            return
        val = objective(p)
        if val > best_val:
            best_p, best_val = p, val
        if level == len(order):
            return
        bound = 0
        for t in order[:level]:
            j = assigned[t]
            if j is not None:
                bound += sc.P[t] * (p[j] - C[j])
        for t in order[level:]:
            v = sc.V[t]
            gain = 0
            for j in cand[t]:
                cap = v[j] if p[j] is None else min(v[j], p[j])
                gain = max(gain, cap - C[j])
            bound += sc.P[t] * gain
        if bound <= best_val:
            return
        t = order[level]
        for j in search.cand[t]:
            u = search.assign(t, j)
            assigned[t] = j
            rec(level + 1)
            assigned[t] = None
            search.undo(u)

    rec(0)
    return sc.vertex(best_p)


def srev(d: TypeDistribution, guard: int = DEFAULT_GUARD) -> Fraction:
    return opt_item_pricing(d, None, guard).revenue


def sprofit(d: TypeDistribution, costs, guard: int = DEFAULT_GUARD) -> Fraction:
    return opt_item_pricing(d, costs, guard).profit
