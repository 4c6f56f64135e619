"""Exact domain types and buyer best-response semantics.

Every quantity is a :class:`fractions.Fraction`; item prices may also be
``INF`` (``math.inf``), which marks an item as withheld.  Items are indexed
from 0 and item subsets are bitmasks (bit ``j`` set means item ``j`` is
available).

Tie-breaking is seller-favoring throughout.  Among utility-maximizing
options the buyer takes the one with the largest seller margin (payment minus
production cost, which is just the payment when there are no costs), then the
largest payment, then buying over not buying, then the lowest index.  A buyer
with exactly zero utility therefore buys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import DimensionError

INF = math.inf

Number = Union[int, str, Fraction]
Vector = tuple  # tuple[Fraction, ...]
ItemPricing = tuple  # tuple[Fraction | INF, ...]
AvailabilityDistribution = dict  # dict[int (bitmask), Fraction]


def frac(x) -> Fraction:
    """Coerce ``x`` to an exact Fraction.  Floats are rejected on purpose."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}; use int, str or Fraction")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def price(x):
    """Like :func:`frac` but also accepts ``INF``, ``"inf"`` and ``None`` as +infinity."""
    if x is None or x == INF or (isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity")):
        return INF
    return frac(x)


def vec(xs: Iterable) -> Vector:
    return tuple(frac(x) for x in xs)


def prices(xs: Iterable) -> ItemPricing:
    return tuple(price(x) for x in xs)


def full_mask(m: int) -> int:
    return (1 << m) - 1


def mask_of(items: Iterable[int]) -> int:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def items_of(mask: int, m: int) -> list[int]:
    return [j for j in range(m) if mask >> j & 1]


def full_availability(m: int) -> AvailabilityDistribution:
    return {full_mask(m): Fraction(1)}


def dot(a: Sequence, b: Sequence) -> Fraction:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class TypeDistribution:
    """Finite-support distribution over unit-demand valuations."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(vec(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(frac(p) for p in self.probs))
        if len(self.values) != len(self.probs):
            raise DimensionError("values and probs differ in length")

    @classmethod
    def from_pairs(cls, pairs) -> "TypeDistribution":
        pairs = list(pairs)
        return cls(tuple(v for v, _ in pairs), tuple(p for _, p in pairs))

    @classmethod
    def point(cls, v) -> "TypeDistribution":
        return cls((v,), (1,))

    @property
    def m(self) -> int:
        return len(self.values[0]) if self.values else 0

    def __iter__(self):
        return iter(zip(self.values, self.probs))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Instance:
    m: int
    buyers: tuple
    costs: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "buyers", tuple(self.buyers))
        if self.costs is not None:
            object.__setattr__(self, "costs", vec(self.costs))

    @property
    def n(self) -> int:
        return len(self.buyers)


@dataclass(frozen=True)
class LotteryMenu:
    """A finite menu of (lottery, price) options.

    The zero lottery at price 0 is always implicitly available and is not
    stored in ``options``.
    """

    options: tuple
    m: int = field(default=-1)

    def __post_init__(self):
        opts = tuple((vec(lam), frac(p)) for lam, p in self.options)
        object.__setattr__(self, "options", opts)
        if self.m < 0:
            if not opts:
                raise DimensionError("empty menu needs an explicit item count")
            object.__setattr__(self, "m", len(opts[0][0]))
        for lam, _ in opts:
            if len(lam) != self.m:
                raise DimensionError(f"lottery {lam} is not {self.m}-dimensional")

    def __iter__(self):
        return iter(self.options)

    def __len__(self):
        return len(self.options)

    def lotteries(self):
        return [lam for lam, _ in self.options]

    def prices(self):
        return [p for _, p in self.options]


@dataclass(frozen=True)
class RandomItemPricing:
    """Finite distribution over deterministic item pricings."""

    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((prices(p), frac(w)) for p, w in self.atoms))

    @classmethod
    def deterministic(cls, p) -> "RandomItemPricing":
        return cls(((p, 1),))

    @property
    def m(self) -> int:
        return len(self.atoms[0][0])

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)


def restrict(p: ItemPricing, mask: int) -> ItemPricing:
    """The pricing ``p`` with every item outside ``mask`` withheld."""
    return tuple(pj if mask >> j & 1 else INF for j, pj in enumerate(p))


class Choice(NamedTuple):
    choice: int | None
    utility: Fraction
    payment: Fraction


_NO_BUY = Choice(None, Fraction(0), Fraction(0))


def lottery_value(v: Sequence, lam: Sequence) -> Fraction:
    """Expected value of a unit-demand type for a lottery."""
    return dot(v, lam)


def _key(utility, margin, payment, index):
    # NONE is (0, 0, 0, 0, 0); real options carry buys=1 and the negated index.
    return (utility, margin, payment, 1, -index)


def best_response_menu(v: Sequence, menu: LotteryMenu, costs: Sequence | None = None) -> Choice:
    if len(v) != menu.m:
        raise DimensionError(f"valuation has {len(v)} items, menu has {menu.m}")
    best, best_key = _NO_BUY, (Fraction(0), Fraction(0), Fraction(0), 0, 0)
    for idx, (lam, p) in enumerate(menu.options):
        u = lottery_value(v, lam) - p
        if u < 0:
            continue
        margin = p - dot(costs, lam) if costs is not None else p
        key = _key(u, margin, p, idx)
        if key > best_key:
            best, best_key = Choice(idx, u, p), key
    return best


def best_response_items(v: Sequence, p: ItemPricing, S: int | Iterable[int] | None = None,
                        costs: Sequence | None = None) -> Choice:
    m = len(p)
    if len(v) != m:
        raise DimensionError(f"valuation has {len(v)} items, pricing has {m}")
    if S is None:
        S = full_mask(m)
    elif not isinstance(S, int):
        S = mask_of(S)
    best, best_key = _NO_BUY, (Fraction(0), Fraction(0), Fraction(0), 0, 0)
    for j in range(m):
        if not S >> j & 1 or p[j] == INF:
            continue
        u = v[j] - p[j]
        if u < 0:
            continue
        margin = p[j] - costs[j] if costs is not None else p[j]
        key = _key(u, margin, p[j], j)
        if key > best_key:
            best, best_key = Choice(j, u, p[j]), key
    return best


def _as_random(pricing) -> RandomItemPricing:
    if isinstance(pricing, RandomItemPricing):
        return pricing
    return RandomItemPricing.deterministic(pricing)


def _outcomes(d: TypeDistribution, pricing, S_dist, costs):
    """Yield (probability, allocation vector, payment) over all randomness."""
    m = d.m
    if isinstance(pricing, LotteryMenu):
        if pricing.m != m:
            raise DimensionError(f"menu has {pricing.m} items, distribution has {m}")
        if S_dist is not None and S_dist != full_availability(m):
            raise ValueError("menus are evaluated under full availability only")
        zero = (Fraction(0),) * m
        for v, pv in d:
            ch = best_response_menu(v, pricing, costs)
            lam = pricing.options[ch.choice][0] if ch.choice is not None else zero
            yield pv, lam, ch.payment
        return
    rp = _as_random(pricing)
    if rp.m != m:
        raise DimensionError(f"pricing has {rp.m} items, distribution has {m}")
    S_dist = S_dist if S_dist is not None else full_availability(m)
    for S, ps in S_dist.items():
        for p, w in rp:
            for v, pv in d:
                ch = best_response_items(v, p, S, costs)
                yield ps * w * pv, ch.choice, ch.payment


def expected_revenue(d: TypeDistribution, pricing, S_dist: AvailabilityDistribution | None = None) -> Fraction:
    return sum((pr * pay for pr, _, pay in _outcomes(d, pricing, S_dist, None)), Fraction(0))


def expected_profit(d: TypeDistribution, pricing, costs: Sequence,
                    S_dist: AvailabilityDistribution | None = None) -> Fraction:
    """Expected payment minus expected production cost of what is sold."""
    costs = vec(costs)
    if len(costs) != d.m:
        raise DimensionError("cost vector has the wrong length")
    total = Fraction(0)
    for pr, alloc, pay in _outcomes(d, pricing, S_dist, costs):
        if isinstance(alloc, tuple):
            cost = dot(costs, alloc)
        else:
            cost = costs[alloc] if alloc is not None else 0
        total += pr * (pay - cost)
    return total


def allocation_vector(d: TypeDistribution, pricing, S_dist: AvailabilityDistribution | None = None,
                      costs: Sequence | None = None) -> Vector:
    """Per-item sale probability, exact over type, pricing and availability randomness."""
    x = [Fraction(0)] * d.m
    for pr, alloc, _ in _outcomes(d, pricing, S_dist, costs):
        if isinstance(alloc, tuple):
            for j, a in enumerate(alloc):
                x[j] += pr * a
        elif alloc is not None:
            x[alloc] += pr
    return tuple(x)


def validate_distribution(d: TypeDistribution, m: int | None = None, where: str = "") -> list[str]:
    out = []
    prefix = f"{where}: " if where else ""
    m = d.m if m is None else m
    if not d.values:
        out.append(prefix + "empty support")
    for t, (v, p) in enumerate(d):
        if len(v) != m:
            out.append(prefix + f"type {t}: valuation has {len(v)} items, expected {m}")
        if any(x < 0 for x in v):
            out.append(prefix + f"type {t}: value < 0")
        if p < 0:
            out.append(prefix + f"type {t}: probability < 0")
    if sum(d.probs, Fraction(0)) != 1:
        out.append(prefix + f"distribution mass != 1 (got {sum(d.probs, Fraction(0))})")
    return out


def validate_instance(inst: Instance) -> list[str]:
    """Return the list of violated invariants; an empty list means the instance is valid."""
    out = []
    if inst.m < 1:
        out.append("m < 1")
    if not inst.buyers:
        out.append("no buyers")
    for i, d in enumerate(inst.buyers):
        out.extend(validate_distribution(d, inst.m, where=f"buyer {i}"))
    if inst.costs is not None:
        if len(inst.costs) != inst.m:
            out.append(f"costs have {len(inst.costs)} entries, expected {inst.m}")
        if any(c < 0 for c in inst.costs):
            out.append("cost < 0")
    return out


def validate_menu(menu: LotteryMenu) -> list[str]:
    out = []
    for k, (lam, p) in enumerate(menu):
        if any(x < 0 or x > 1 for x in lam):
            out.append(f"option {k}: lottery entry outside [0, 1]")
        if sum(lam, Fraction(0)) > 1:
            out.append(f"option {k}: lottery mass > 1")
        if p < 0:
            out.append(f"option {k}: price < 0")
    return out


def validate_random_pricing(rp: RandomItemPricing) -> list[str]:
    out = []
    for k, (p, w) in enumerate(rp):
        if w < 0:
            out.append(f"atom {k}: weight < 0")
        if any(x != INF and x < 0 for x in p):
            out.append(f"atom {k}: price < 0")
    if sum((w for _, w in rp), Fraction(0)) != 1:
        out.append("pricing weights do not sum to 1")
    return out
