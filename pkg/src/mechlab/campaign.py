"""Seeded random cases for the property campaign (``mechlab sweep``) and the acceptance suite.

Each ``*_case(seed)`` builds its own random inputs from ``seed`` alone, runs one
pipeline and returns a :class:`CaseResult` whose ``checks`` map a check name to
pass/fail.  Cases are independent, so they can run in any order or in parallel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .buymany import buy_many_closure, profit_bound_report
from .exante import convex_decompose, exante_global, exante_srev, srev_subgradient
from .instances import STYLES, random_distribution, random_instance, random_menu
from .model import INF, Instance, allocation_vector, full_mask
from .pricing import enumerate_vertex_pricings, opt_item_pricing
from .sequential import build_sequential, evaluate_sequential, verify_half


@dataclass
class CaseResult:
    kind: str
    seed: int
    checks: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _grid(rng, k=8):
    return Fraction(rng.randint(0, k), k)


def profit_bound_case(seed: int) -> CaseResult:
    """Closure of a random menu against random costs; m <= 5, support <= 6."""
    rng = random.Random(seed)
    m, support = rng.randint(1, 5), rng.randint(1, 6)
    d = random_distribution(rng, m, support, 8, rng.choice(STYLES))
    c = tuple(Fraction(rng.randint(0, 4), 2) for _ in range(m))
    menu = buy_many_closure(random_menu(m, rng.randint(1, 5), seed=rng.randrange(2**31), scale=4))
    best = opt_item_pricing(d, c)
    rep = profit_bound_report(d, menu, c, best.profit)
    checks = {}
    for name in ("ub", "lb", "envelope", "profit_identity", "monotone_convex"):
        checks[name] = all(r.checks[name] for r in rep.records)
    checks.update(rep.checks)
    return CaseResult("profit-bound", seed, checks,
                      f"m={m} support={support} profit_2c={rep.buy_many_profit_2c} sprofit={best.profit}")


def random_availability(rng, m: int, k: int | None = None) -> dict:
    k = k or rng.randint(1, 4)
    weights: dict = {}
    for _ in range(k):
        S = rng.randrange(2**m)
        weights[S] = weights.get(S, 0) + rng.randint(1, 5)
    total = sum(weights.values())
    return {S: Fraction(w, total) for S, w in weights.items()}


def decompose_case(seed: int) -> CaseResult:
    """Random (pricing, availability law, target) with the target below x*; m <= 5."""
    rng = random.Random(seed)
    m, support = rng.randint(1, 5), rng.randint(1, 6)
    d = random_distribution(rng, m, support, 8, rng.choice(STYLES))
    p = tuple(INF if rng.random() < 0.2 else Fraction(rng.randint(0, 16), 2) for _ in range(m))
    S_dist = random_availability(rng, m) if rng.random() < 0.7 else {full_mask(m): Fraction(1)}
    x_star = allocation_vector(d, p, S_dist)
    y = tuple(_grid(rng) * x for x in x_star)
    dec = convex_decompose(p, d, S_dist, y)
    checks = {
        "allocation_equals_target": dec.allocation == y,
        "revenue_equals_y_dot_p": dec.revenue == dec.target_revenue,
        "weights_sum_to_one": sum(dec.weights.values()) == 1,
        "weights_nonnegative": all(w > 0 for w in dec.weights.values()),
        "combination_matches": tuple(
            sum((w * dec.points[T][j] for T, w in dec.weights.items()), Fraction(0)) for j in range(m)) == y,
    }
    return CaseResult("decompose", seed, checks, f"m={m} p={p} y={y}")


def sequential_case(seed: int, orders: int = 3) -> CaseResult:
    """verify_half on a random instance (n <= 3, m <= 5, support <= 4) under random orders."""
    rng = random.Random(seed)
    n, m, support = rng.randint(1, 3), rng.randint(1, 5), rng.randint(1, 4)
    inst = random_instance(n, m, support, style=rng.choice(STYLES), seed=rng.randrange(2**31))
    ea = exante_global(inst)
    checks: dict = {}
    worst = None
    for k in range(orders):
        order = list(range(n))
        rng.shuffle(order)
        rep = verify_half(inst, order, ea)
        for name, okay in rep.checks.items():
            checks[name] = checks.get(name, True) and okay
        worst = rep.ratio if worst is None else min(worst, rep.ratio)
    return CaseResult("sequential", seed, checks, f"n={n} m={m} worst_ratio={worst}")


def exactness_case(seed: int) -> CaseResult:
    """SRev(d, 1) from the mixture LP against the branch-and-bound oracle."""
    rng = random.Random(seed)
    m, support = rng.randint(1, 4), rng.randint(1, 5)
    d = random_distribution(rng, m, support, 8, rng.choice(STYLES))
    lp = exante_srev(d, (Fraction(1),) * m)
    best = opt_item_pricing(d)
    return CaseResult("exactness", seed, {"exante_at_one_equals_opt": lp.revenue == best.revenue},
                      f"lp={lp.revenue} opt={best.revenue}")


def concavity_case(seed: int, points: int = 5) -> CaseResult:
    """Midpoint concavity of SRev(d, .) and the dual supergradient at random points."""
    rng = random.Random(seed)
    m, support = rng.randint(1, 4), rng.randint(1, 4)
    d = random_distribution(rng, m, support, 8, rng.choice(STYLES))
    verts = enumerate_vertex_pricings(d)

    def srev_at(x):
        return exante_srev(d, x, vertices=verts).revenue

    x1 = tuple(_grid(rng) for _ in range(m))
    x2 = tuple(_grid(rng) for _ in range(m))
    t = _grid(rng)
    mid = tuple(t * a + (1 - t) * b for a, b in zip(x1, x2))
    lhs, rhs = srev_at(mid), t * srev_at(x1) + (1 - t) * srev_at(x2)
    x0 = tuple(_grid(rng) for _ in range(m))
    pts = [tuple(_grid(rng) for _ in range(m)) for _ in range(points)]
    sg = srev_subgradient(d, x0, pts, vertices=verts)
    checks = {
        "concave": lhs >= rhs,
        "dual_nonnegative": all(c >= 0 for c in sg.costs),
        "supergradient": all(ch[3] for ch in sg.checks),
    }
    return CaseResult("concavity", seed, checks, f"x1={x1} x2={x2} t={t} lhs={lhs} rhs={rhs}")


def monte_carlo_case(seed: int, trials: int = 20_000) -> CaseResult:
    """Seeded Monte-Carlo revenue of a randomized sequential pricing against the exact DP."""
    rng = random.Random(seed)
    n, m = rng.randint(1, 3), rng.randint(1, 4)
    inst: Instance = random_instance(n, m, rng.randint(1, 4), style=rng.choice(STYLES),
                                     seed=rng.randrange(2**31))
    seq, _ = build_sequential(inst, exante_global(inst))
    exact = evaluate_sequential(inst, seq).total
    mc = evaluate_sequential(inst, seq, mode="mc", trials=trials, seed=seed)
    # the tiny absolute slack only absorbs float rounding when the variance is zero
    err = abs(mc.total - float(exact))
    return CaseResult("monte-carlo", seed, {"within_half_width": err <= mc.half_width + 1e-9},
                      f"exact={exact} mc={mc.total:.6f} half_width={mc.half_width:.6f}")


CASES = {
    "profit-bound": profit_bound_case,
    "decompose": decompose_case,
    "sequential": sequential_case,
    "exactness": exactness_case,
    "concavity": concavity_case,
    "monte-carlo": monte_carlo_case,
}


def run_case(kind: str, seed: int) -> CaseResult:
    return CASES[kind](seed)
