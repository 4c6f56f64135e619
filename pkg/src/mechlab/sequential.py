"""Sequential item pricing: exact availability dynamics, construction and evaluation.

Buyers arrive in ``order``; each faces its own (possibly random) item pricing
over the items still unsold and buys its favorite.  The law of the unsold set
is tracked exactly as a distribution over bitmasks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError, GuardError, InfeasibleError
from .exante import ExAnteSolution, convex_decompose, exante_global
from .model import (
    INF,
    Instance,
    RandomItemPricing,
    allocation_vector,
    expected_revenue,
    full_mask,
)

DP_GUARD = 1 << 16


@dataclass(frozen=True)
class SequentialPricing:
    order: tuple  # buyer indices in arrival order
    pricings: tuple  # RandomItemPricing per buyer, indexed by buyer

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "pricings", tuple(
            p if isinstance(p, RandomItemPricing) else RandomItemPricing.deterministic(p)
            for p in self.pricings))
        if sorted(self.order) != list(range(len(self.pricings))):
            raise ValueError(f"order {self.order} is not a permutation of the buyers")

    @property
    def deterministic(self) -> bool:
        return all(len(p) == 1 for p in self.pricings)


class _Buyer:
    """Precomputed acceptable-item rankings for one buyer under one random pricing."""

    def __init__(self, d, rp: RandomItemPricing):
        self.d = d
        self.rp = rp
        m = d.m
        self.ranked = []  # [atom][type] -> list of items, best first
        for p, _ in rp:
            per_type = []
            for v in d.values:
                keys = []
                for j in range(m):
                    if p[j] == INF or v[j] < p[j]:
                        continue
                    keys.append(((v[j] - p[j], p[j], p[j], -j), j))
                keys.sort(reverse=True)
                per_type.append([j for _, j in keys])
            self.ranked.append(per_type)

    def choice(self, a, t, S):
        for j in self.ranked[a][t]:
            if S >> j & 1:
                return j
        return None

    def outcomes(self, S, atoms=None):
        """Yield (probability, item or None, payment) given the unsold set S."""
        for a, (p, w) in enumerate(self.rp):
            if atoms is not None and a not in atoms:
                continue
            wa = w if atoms is None else Fraction(1)
            for t, pv in enumerate(self.d.probs):
                j = self.choice(a, t, S)
                yield wa * pv, j, (p[j] if j is not None else Fraction(0))


def _check(inst: Instance, seq: SequentialPricing, guard: int):
    if len(seq.pricings) != inst.n:
        raise DimensionError(f"{len(seq.pricings)} pricings for {inst.n} buyers")
    for rp in seq.pricings:
        if rp.m != inst.m:
            raise DimensionError("pricing dimension differs from the instance")
    if 2**inst.m > guard:
        raise GuardError(f"2^{inst.m} availability states exceed guard {guard}")


def _step(dist: dict, buyer: _Buyer, atoms=None):
    """Propagate the unsold-set law through one buyer; returns (new law, revenue, sales)."""
    out: dict = {}
    rev = Fraction(0)
    sales: dict = {}
    for S, pS in dist.items():
        for pr, j, pay in buyer.outcomes(S, atoms):
            q = pS * pr
            if q == 0:
                continue
            if j is None:
                out[S] = out.get(S, 0) + q
            else:
                T = S & ~(1 << j)
                out[T] = out.get(T, 0) + q
                rev += q * pay
                sales[j] = sales.get(j, 0) + q
    return out, rev, sales


def availability_dp(inst: Instance, seq: SequentialPricing, upto: int, guard: int = DP_GUARD) -> dict:
    """Exact law of the unsold set faced by the buyer at position ``upto`` of the order."""
    _check(inst, seq, guard)
    dist = {full_mask(inst.m): Fraction(1)}
    for b in seq.order[:upto]:
        dist, _, _ = _step(dist, _Buyer(inst.buyers[b], seq.pricings[b]))
    return dist


def item_availability(dist: dict, m: int) -> tuple:
    return tuple(sum((p for S, p in dist.items() if S >> j & 1), Fraction(0)) for j in range(m))


@dataclass
class SequentialEvalReport:
    total: Fraction | float
    per_buyer: list  # revenue by buyer index
    item_sale_prob: tuple
    availability: list  # per buyer index: Pr[item j unsold on arrival]
    mode: str = "exact"
    half_width: float | None = None
    trials: int | None = None
    seed: int | None = None


def _exact(inst, seq, guard):
    _check(inst, seq, guard)
    m = inst.m
    dist = {full_mask(m): Fraction(1)}
    per_buyer = [Fraction(0)] * inst.n
    avail = [None] * inst.n
    sold = [Fraction(0)] * m
    for b in seq.order:
        avail[b] = item_availability(dist, m)
        dist, rev, sales = _step(dist, _Buyer(inst.buyers[b], seq.pricings[b]))
        per_buyer[b] = rev
        for j, q in sales.items():
            sold[j] += q
    return SequentialEvalReport(sum(per_buyer, Fraction(0)), per_buyer, tuple(sold), avail)


def _monte_carlo(inst, seq, trials, seed, guard):
    _check(inst, seq, guard)
    m = inst.m
    rng = np.random.default_rng(seed)
    masks = np.full(trials, full_mask(m), dtype=np.int64)
    total = np.zeros(trials)
    per_buyer = [0.0] * inst.n
    sold = np.zeros(m)
    avail = [None] * inst.n
    states = np.arange(2**m)
    for b in seq.order:
        buyer = _Buyer(inst.buyers[b], seq.pricings[b])
        A, Tn = len(buyer.rp), len(buyer.d)
        choice = np.full((A, Tn, 2**m), -1, dtype=np.int64)
        pay = np.zeros((A, Tn, 2**m))
        for a, (p, _) in enumerate(buyer.rp):
            for t in range(Tn):
                for S in states:
                    j = buyer.choice(a, t, int(S))
                    if j is not None:
                        choice[a, t, S] = j
                        pay[a, t, S] = float(p[j])
        avail[b] = tuple(float(np.mean((masks >> j) & 1)) for j in range(m))
        aw = np.array([float(w) for _, w in buyer.rp])
        tw = np.array([float(p) for p in buyer.d.probs])
        a_idx = rng.choice(A, size=trials, p=aw / aw.sum())
        t_idx = rng.choice(Tn, size=trials, p=tw / tw.sum())
        ch = choice[a_idx, t_idx, masks]
        got = pay[a_idx, t_idx, masks]
        total += got
        per_buyer[b] = float(got.mean())
        hit = ch >= 0
        sold += np.bincount(ch[hit], minlength=m)[:m] / trials
        masks[hit] &= ~(np.int64(1) << ch[hit])
    mean = float(total.mean())
    hw = 2.5758293035489 * float(total.std(ddof=1)) / np.sqrt(trials) if trials > 1 else float("inf")
    return SequentialEvalReport(mean, per_buyer, tuple(float(x) for x in sold), avail,
                                mode="mc", half_width=float(hw), trials=trials, seed=seed)


def evaluate_sequential(inst: Instance, seq: SequentialPricing, mode: str = "exact",
                        trials: int = 100_000, seed: int = 0, guard: int = DP_GUARD) -> SequentialEvalReport:
    """Expected revenue exactly (``mode="exact"``) or by seeded sampling (``mode="mc"``)."""
    if mode == "exact":
        return _exact(inst, seq, guard)
    if mode == "mc":
        return _monte_carlo(inst, seq, trials, seed, guard)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class BuyerCertificate:
    buyer: int
    position: int
    availability: tuple  # Pr[j unsold] on arrival
    sold_before: tuple  # Pr[j sold by earlier buyers]
    sold_budget: tuple  # sum of x_{i'j}/2 over earlier buyers
    allocation: tuple  # E[x_{q_i, S_i}]
    target_allocation: tuple  # x_i / 2
    revenue: Fraction
    target_revenue: Fraction  # half the buyer's ex-ante revenue
    available_allocation_ok: bool  # E[x_{p_i, S_i}] >= x_i / 2, atom by atom

    @property
    def ok(self) -> bool:
        return (self.allocation == self.target_allocation
                and self.revenue == self.target_revenue
                and self.sold_before == self.sold_budget
                and all(a >= Fraction(1, 2) for a in self.availability)
                and self.available_allocation_ok)


def _merge(atoms):
    acc: dict = {}
    for p, w in atoms:
        acc[p] = acc.get(p, 0) + w
    return RandomItemPricing(tuple((p, w) for p, w in acc.items() if w != 0))


def build_sequential(inst: Instance, ea: ExAnteSolution, order=None, guard: int = DP_GUARD):
    """Randomized sequential pricing selling each buyer exactly half its ex-ante allocation.

    Returns ``(SequentialPricing, certificates)``.  Raises InfeasibleError if
    some decomposition target is out of reach.
    """
    m, n = inst.m, inst.n
    order = tuple(range(n)) if order is None else tuple(order)
    if 2**m > guard:
        raise GuardError(f"2^{m} availability states exceed guard {guard}")
    half = Fraction(1, 2)
    dist = {full_mask(m): Fraction(1)}
    pricings: list = [None] * n
    certs = []
    budget = [Fraction(0)] * m
    sold = [Fraction(0)] * m
    for pos, b in enumerate(order):
        d = inst.buyers[b]
        avail = item_availability(dist, m)
        atoms = []
        for p, w in ea.pricings[b]:
            x_full = allocation_vector(d, p)
            x_here = allocation_vector(d, p, dist)
            target = tuple(half * x for x in x_full)
            if any(h < t for h, t in zip(x_here, target)):
                raise InfeasibleError(
                    f"buyer {b}: availability too low, E[x_(p,S)]={x_here} below x_p/2={target}")
            dec = convex_decompose(p, d, dist, target)
            atoms.extend((q, w * a) for q, a in dec.pricing)
        q = _merge(atoms)
        pricings[b] = q
        certs.append(BuyerCertificate(
            buyer=b,
            position=pos,
            availability=avail,
            sold_before=tuple(sold),
            sold_budget=tuple(budget),
            allocation=allocation_vector(d, q, dist),
            target_allocation=tuple(half * x for x in ea.allocations[b]),
            revenue=expected_revenue(d, q, dist),
            target_revenue=half * ea.revenues[b],
            available_allocation_ok=True,  # checked per atom above
        ))
        dist, _, sales = _step(dist, _Buyer(d, q))
        for j in range(m):
            budget[j] += half * ea.allocations[b][j]
            sold[j] += sales.get(j, 0)
    return SequentialPricing(order, tuple(pricings)), certs


@dataclass
class Derandomization:
    pricing: SequentialPricing
    revenue: Fraction
    randomized_revenue: Fraction
    conditionals: list  # per position: expected total for each atom of that buyer


def _after(pay, j, S, nxt):
    # revenue now plus the continuation value from the resulting unsold set
    return nxt[S] if j is None else pay + nxt[S & ~(1 << j)]


def derandomize(inst: Instance, seq: SequentialPricing, guard: int = DP_GUARD) -> Derandomization:
    """Fix one atom per buyer, in arrival order, by the method of conditional expectations."""
    _check(inst, seq, guard)
    m = inst.m
    buyers = {b: _Buyer(inst.buyers[b], seq.pricings[b]) for b in seq.order}
    states = range(2**m)
    # value[k][S]: expected revenue of positions k.. given unsold set S, all random
    value = [None] * (len(seq.order) + 1)
    value[-1] = {S: Fraction(0) for S in states}
    for k in range(len(seq.order) - 1, -1, -1):
        nxt, buyer = value[k + 1], buyers[seq.order[k]]
        value[k] = {S: sum((pr * _after(pay, j, S, nxt) for pr, j, pay in buyer.outcomes(S)), Fraction(0))
                    for S in states}
    randomized = value[0][full_mask(m)]
    dist = {full_mask(m): Fraction(1)}
    earned = Fraction(0)
    chosen = [None] * inst.n
    conditionals = []
    for k, b in enumerate(seq.order):
        buyer, nxt = buyers[b], value[k + 1]
        scores = []
        for a in range(len(buyer.rp)):
            s = earned
            for S, pS in dist.items():
                for pr, j, pay in buyer.outcomes(S, atoms={a}):
                    s += pS * pr * _after(pay, j, S, nxt)
            scores.append(s)
        best = max(range(len(scores)), key=lambda a: (scores[a], -a))
        conditionals.append(scores)
        chosen[b] = RandomItemPricing.deterministic(buyer.rp.atoms[best][0])
        dist, rev, _ = _step(dist, buyer, atoms={best})
        earned += rev
    det = SequentialPricing(seq.order, tuple(chosen))
    return Derandomization(det, earned, randomized, conditionals)


@dataclass
class HalfReport:
    ratio: Fraction
    exante: ExAnteSolution
    randomized: SequentialPricing
    certificates: list
    derandomized: Derandomization
    evaluation: SequentialEvalReport
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_half(inst: Instance, order=None, ea: ExAnteSolution | None = None,
                guard: int = DP_GUARD) -> HalfReport:
    """Ex-ante solution -> half-scaled randomized pricing -> deterministic pricing, checked exactly."""
    if ea is None:
        ea = exante_global(inst)
    seq, certs = build_sequential(inst, ea, order, guard)
    der = derandomize(inst, seq, guard)
    ev = evaluate_sequential(inst, der.pricing, guard=guard)
    total = ea.total
    ratio = ev.total / total if total else Fraction(1)
    checks = {
        "certificates": all(c.ok for c in certs),
        "randomized_is_half": der.randomized_revenue == total / 2,
        "derandomized_ge_randomized": der.revenue >= der.randomized_revenue,
        "evaluation_matches": ev.total == der.revenue,
        "ratio_ge_half": 2 * ev.total >= total,
        "single_sale": all(x <= 1 for x in ev.item_sale_prob),
    }
    return HalfReport(ratio, ea, seq, certs, der, ev, checks)
