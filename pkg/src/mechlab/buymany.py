"""Buy-many menus and the cost-blended item pricings derived from them.

A finite menu is buy-many when no option costs more than replicating it by
repeated purchases: ``p(lam) <= hat . lam`` where ``hat[i]`` is the cheapest
expected cost of obtaining item ``i`` by buying one option until ``i`` shows
up.  A buyer facing a buy-many menu may also use those repeat-purchase
strategies, so evaluation goes through :func:`with_repeat_purchases`.

From a menu whose prices cover twice the production costs we derive the item
pricing ``q`` (cheapest cost-adjusted acquisition price per item) and the
family ``q_alpha = alpha c + (1 - alpha) q``.  For a fixed type the utility
under ``q_alpha`` is a convex piecewise-linear function of ``alpha`` whose
slope is the margin the seller earns divided by ``1 - alpha``; integrating it
against the density ``1 / ((1 - alpha) ln 4m)`` gives the expected profit of
a random ``q_alpha`` as a rational multiple of ``1 / ln 4m``.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import DimensionError
from .model import (
    INF,
    LotteryMenu,
    TypeDistribution,
    best_response_items,
    best_response_menu,
    dot,
    frac,
    vec,
)


def hat_prices(menu: LotteryMenu) -> tuple:
    """Cheapest per-acquisition cost of each item; INF where no option allocates it."""
    hat = [INF] * menu.m
    for lam, p in menu:
        for i, li in enumerate(lam):
            if li > 0:
                r = p / li
                if hat[i] == INF or r < hat[i]:
                    hat[i] = r
    return tuple(hat)


def replication_cost(hat, lam) -> Fraction | float:
    total = Fraction(0)
    for h, li in zip(hat, lam):
        if li > 0:
            if h == INF:
                return INF
            total += h * li
    return total


class BuyManyViolation(NamedTuple):
    option: int
    price: Fraction
    replication_cost: Fraction


def check_buy_many(menu: LotteryMenu) -> BuyManyViolation | None:
    """None when the menu is buy-many, else the first option priced above its replication cost."""
    hat = hat_prices(menu)
    for k, (lam, p) in enumerate(menu):
        rc = replication_cost(hat, lam)
        if p > rc:
            return BuyManyViolation(k, p, rc)
    return None


def buy_many_closure(menu: LotteryMenu) -> LotteryMenu:
    """Lower every price to its replication cost, repeating until nothing changes.

    One pass already reaches the fixpoint: lowering a price to ``hat . lam``
    never pushes its ratio below any ``hat[i]``.
    """
    while True:
        hat = hat_prices(menu)
        opts = []
        changed = False
        for lam, p in menu:
            rc = replication_cost(hat, lam)
            if rc < p:
                p, changed = rc, True
            opts.append((lam, p))
        menu = LotteryMenu(tuple(opts), menu.m)
        if not changed:
            return menu


def strip_below_cost(menu: LotteryMenu, c2) -> LotteryMenu:
    """Drop options priced below the production cost ``c2 . lam``, then close."""
    c2 = vec(c2)
    if len(c2) != menu.m:
        raise DimensionError("cost vector has the wrong length")
    kept = tuple((lam, p) for lam, p in menu if p >= dot(c2, lam))
    return buy_many_closure(LotteryMenu(kept, menu.m))


def with_repeat_purchases(menu: LotteryMenu) -> LotteryMenu:
    """The menu plus, for each reachable item ``i``, the sure lottery on ``i`` at ``hat[i]``."""
    hat = hat_prices(menu)
    opts = list(menu.options)
    present = {lam: p for lam, p in opts}
    for i, h in enumerate(hat):
        if h == INF:
            continue
        e = tuple(Fraction(int(j == i)) for j in range(menu.m))
        if e in present and present[e] <= h:
            continue
        opts.append((e, h))
    return LotteryMenu(tuple(opts), menu.m)


def derived_item_pricing_q(menu: LotteryMenu, c) -> tuple:
    """``q_i = min over options with lam_i > 0 of (p - c.lam) / lam_i + c_i``."""
    c = vec(c)
    if len(c) != menu.m:
        raise DimensionError("cost vector has the wrong length")
    q = [INF] * menu.m
    for lam, p in menu:
        net = p - dot(c, lam)
        for i, li in enumerate(lam):
            if li > 0:
                r = net / li + c[i]
                if q[i] == INF or r < q[i]:
                    q[i] = r
    return tuple(q)


def alpha_range(m: int) -> tuple:
    return Fraction(-1), 1 - Fraction(1, 2 * m)


def q_alpha(q, c, alpha) -> tuple:
    alpha = frac(alpha)
    lo, hi = alpha_range(len(q))
    if not lo <= alpha <= hi:
        raise ValueError(f"alpha={alpha} outside [{lo}, {hi}]")
    c = vec(c)
    return tuple(INF if qi == INF else alpha * ci + (1 - alpha) * qi for qi, ci in zip(q, c))


def sample_alpha(m: int, u: float) -> float:
    """Inverse CDF of the density 1 / ((1 - alpha) ln 4m) on [-1, 1 - 1/(2m)]."""
    if m < 1 or not 0 <= u <= 1:
        raise ValueError("need m >= 1 and u in [0, 1]")
    return 1 - 2 * (4 * m) ** (-u)


@dataclass(frozen=True)
class Piece:
    start: Fraction
    end: Fraction
    item: int | None
    slope: Fraction
    intercept: Fraction

    def __call__(self, alpha):
        return self.intercept + self.slope * alpha


@dataclass(frozen=True)
class UtilityCurve:
    """Upper envelope of the per-item utility lines over the alpha range."""

    pieces: tuple

    @property
    def start(self):
        return self.pieces[0].start

    @property
    def end(self):
        return self.pieces[-1].end

    def piece_at(self, alpha) -> Piece:
        alpha = frac(alpha)
        for pc in self.pieces:
            if pc.start <= alpha <= pc.end:
                return pc
        raise ValueError(f"alpha={alpha} outside the curve's range")

    def __call__(self, alpha) -> Fraction:
        return self.piece_at(alpha)(frac(alpha))

    def breakpoints(self) -> list:
        return [pc.start for pc in self.pieces[1:]]

    def integral_of_slope(self) -> Fraction:
        """Sum of slope * length; equals end value minus start value when continuous."""
        return sum((pc.slope * (pc.end - pc.start) for pc in self.pieces), Fraction(0))


def utility_curve(v, q, c) -> UtilityCurve:
    """``u(v, alpha) = max(0, max_j v_j - q_alpha_j)`` as exact linear pieces."""
    m = len(q)
    v, c = vec(v), vec(c)
    if len(v) != m or len(c) != m:
        raise DimensionError("valuation, q and costs must agree on m")
    a, b = alpha_range(m)
    # line j: (v_j - q_j) + alpha (q_j - c_j); the no-purchase line is 0
    lines = [(None, Fraction(0), Fraction(0))]
    for j in range(m):
        if q[j] != INF:
            lines.append((j, q[j] - c[j], v[j] - q[j]))

    pieces = []
    cur = a
    line = _top(lines, a)
    while True:
        nxt = b
        for ln in lines:
            if ln[1] > line[1]:
                x = (line[2] - ln[2]) / (ln[1] - line[1])
                if cur < x < nxt:
                    nxt = x
        pieces.append(Piece(cur, nxt, line[0], line[1], line[2]))
        if nxt >= b:
            break
        cur, line = nxt, _top(lines, nxt)
    return UtilityCurve(tuple(pieces))


def _top(lines, alpha):
    # highest line at alpha; ties go to the steeper line, which wins to the right
    return max(lines, key=lambda ln: (ln[2] + ln[1] * alpha, ln[1]))


def _ln_bounds(k: int) -> tuple:
    """Rational bracket around ln k, wide enough to absorb libm rounding."""
    x = Fraction(math.log(k))
    eps = Fraction(1, 2**40)
    return x - eps, x + eps


def leq_times_log(lhs: Fraction, coef: Fraction, k: int) -> bool:
    """Decide ``lhs <= coef * ln k`` for rationals with ``coef >= 0``."""
    lo, hi = _ln_bounds(k)
    if lhs <= coef * lo:
        return True
    if lhs > coef * hi:
        return False
    raise ArithmeticError("comparison too close to decide with the logarithm bracket")


@dataclass
class TypeRecord:
    index: int
    prob: Fraction
    u_start: Fraction  # u(v, -1)
    u_end: Fraction  # u(v, 1 - 1/(2m))
    u_menu: Fraction  # utility under the buy-many menu
    profit_menu_2c: Fraction  # Profit_{p,2c}(v)
    alpha_profit_coef: Fraction  # E_alpha Profit_{q_alpha,c}(v) * ln 4m
    piecewise_coef: Fraction  # same quantity by piecewise integration
    evaluated_coef: Fraction  # same quantity from best responses at piece midpoints
    slopes: tuple
    checks: dict = field(default_factory=dict)


@dataclass
class ProfitBoundReport:
    m: int
    records: list
    buy_many_profit_2c: Fraction  # Profit of the stripped menu at costs 2c
    original_profit_2c: Fraction  # Profit of the menu as supplied, at costs 2c
    alpha_profit_coef: Fraction  # E_alpha Profit_{q_alpha,c}(D) * ln 4m
    sprofit: Fraction
    q: tuple
    stripped: LotteryMenu
    violations: list
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def log_factor(self) -> float:
        return math.log(4 * self.m)

    @property
    def bound(self) -> float:
        return 2 * self.log_factor

    @property
    def ratio(self) -> float:
        if self.sprofit == 0:
            return 0.0 if self.buy_many_profit_2c == 0 else math.inf
        return float(self.buy_many_profit_2c / self.sprofit)

    def csv_rows(self) -> list:
        rows = [("type", "prob", "u_start", "u_end", "u_menu", "profit_menu_2c",
                 "alpha_profit_times_ln4m", "slack_lb")]
        for r in self.records:
            slack = r.u_end - r.u_menu - r.profit_menu_2c / 2
            rows.append((r.index, r.prob, r.u_start, r.u_end, r.u_menu, r.profit_menu_2c,
                         r.alpha_profit_coef, slack))
        return [tuple(str(x) for x in row) for row in rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.csv_rows())
        return buf.getvalue()


def profit_bound_report(d: TypeDistribution, menu: LotteryMenu, c, sprofit) -> ProfitBoundReport:
    """Check the cost-doubling profit bound for a buy-many menu, type by type."""
    m = menu.m
    c = vec(c)
    if d.m != m or len(c) != m:
        raise DimensionError("distribution, menu and costs must agree on m")
    sprofit = frac(sprofit)
    violations = []
    w = check_buy_many(menu)
    if w is not None:
        violations.append(f"menu is not buy-many: option {w.option} costs {w.price} > {w.replication_cost}")
    c2 = tuple(2 * x for x in c)
    stripped = strip_below_cost(menu, c2)
    ext = with_repeat_purchases(stripped)
    ext_orig = with_repeat_purchases(menu)
    q = derived_item_pricing_q(stripped, c)
    a, b = alpha_range(m)
    zero = (Fraction(0),) * m
    records = []
    total_profit = total_orig = total_coef = Fraction(0)
    for t, (v, pv) in enumerate(d):
        ch = best_response_menu(v, ext, c2)
        lam = ext.options[ch.choice][0] if ch.choice is not None else zero
        profit = ch.payment - dot(c2, lam)
        cho = best_response_menu(v, ext_orig, c2)
        lamo = ext_orig.options[cho.choice][0] if cho.choice is not None else zero
        total_orig += pv * (cho.payment - dot(c2, lamo))
        curve = utility_curve(v, q, c)
        u0, u1 = curve(a), curve(b)
        coef = u1 - u0
        piecewise = curve.integral_of_slope()
        evaluated = Fraction(0)
        for pc in curve.pieces:
            mid = (pc.start + pc.end) / 2
            br = best_response_items(v, q_alpha(q, c, mid), costs=c)
            margin = br.payment - c[br.choice] if br.choice is not None else Fraction(0)
            evaluated += margin / (1 - mid) * (pc.end - pc.start)
        slopes = tuple(pc.slope for pc in curve.pieces)
        rec = TypeRecord(t, pv, u0, u1, ch.utility, profit, coef, piecewise, evaluated, slopes)
        rec.checks = {
            "ub": u0 <= ch.utility,
            "lb": u1 >= ch.utility + profit / 2,
            "envelope": piecewise == coef,
            "profit_identity": evaluated == coef,
            "monotone_convex": all(s >= 0 for s in slopes)
            and all(x <= y for x, y in zip(slopes, slopes[1:])),
        }
        for name, okay in rec.checks.items():
            if not okay:
                violations.append(f"type {t}: {name} fails (u_start={u0}, u_end={u1}, "
                                  f"u_menu={ch.utility}, profit_2c={profit})")
        records.append(rec)
        total_profit += pv * profit
        total_coef += pv * coef
    checks = {
        # ln 4m * E_alpha profit >= Profit_{p,2c} / 2
        "chain": total_coef >= total_profit / 2,
        # E_alpha profit <= SProfit_c
        "alpha_profit_le_sprofit": leq_times_log(total_coef, sprofit, 4 * m),
        # Profit_{p,2c} <= 2 ln 4m SProfit_c
        "theorem": leq_times_log(total_profit, 2 * sprofit, 4 * m),
    }
    for name, okay in checks.items():
        if not okay:
            violations.append(f"aggregate {name} fails (profit_2c={total_profit}, "
                              f"coef={total_coef}, sprofit={sprofit})")
    return ProfitBoundReport(m, records, total_profit, total_orig, total_coef, sprofit, q,
                             stripped, violations, checks)


def estimate_alpha_profit(d: TypeDistribution, q, c, trials: int, seed: int) -> tuple:
    """Monte-Carlo mean and 99% half-width of the profit of ``q_alpha`` for random alpha."""
    rng = random.Random(seed)
    m = len(q)
    c = vec(c)
    cf = [float(x) for x in c]
    qf = [math.inf if x == INF else float(x) for x in q]
    types = [[float(x) for x in v] for v in d.values]
    weights = [float(p) for p in d.probs]
    total = total_sq = 0.0
    for _ in range(trials):
        alpha = sample_alpha(m, rng.random())
        v = rng.choices(types, weights)[0]
        best, key = None, (0.0, 0.0)
        for j in range(m):
            if qf[j] == math.inf:
                continue
            pj = alpha * cf[j] + (1 - alpha) * qf[j]
            k = (v[j] - pj, pj - cf[j])
            if k[0] >= 0 and k > key:
                best, key = j, k
        x = key[1] if best is not None else 0.0
        total += x
        total_sq += x * x
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    return mean, 2.5758293035489 * math.sqrt(var / trials)
