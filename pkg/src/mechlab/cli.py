"""Command-line driver: every pipeline writes CSV rows (name, lhs, rhs, relation, pass).

Exit status is 0 when every checked row passes, 2 on unreadable or invalid
input, 3 when a size guard trips and 4 when a check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .buymany import (
    buy_many_closure,
    check_buy_many,
    hat_prices,
    profit_bound_report,
    replication_cost,
    strip_below_cost,
)
from .campaign import CASES, run_case
from .errors import DimensionError, GuardError, InfeasibleError, InvariantError, ParseError
from .exante import DECOMPOSE_GUARD, convex_decompose, exante_global, exante_srev, srev_subgradient
from .instances import fmt, gap_instance, read_instance, read_menu, write_sequential
from .lp import check_certificate
from .model import INF, allocation_vector, expected_profit, expected_revenue, validate_instance
from .pricing import DEFAULT_GUARD, opt_item_pricing
from .sequential import DP_GUARD, evaluate_sequential, verify_half

EXIT_OK, EXIT_PARSE, EXIT_GUARD, EXIT_ASSERT = 0, 2, 3, 4
INFO = "info"


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction) or isinstance(x, int):
        return fmt(x)
    if isinstance(x, float):
        return "inf" if x == INF else f"{x:.12g}"
    if isinstance(x, (tuple, list)):
        return "(" + " ".join(_cell(v) for v in x) + ")"
    return str(x)


class Table:
    def __init__(self):
        self.rows = []

    def check(self, name, lhs, rhs, relation, ok):
        self.rows.append((name, lhs, rhs, relation, bool(ok)))

    def info(self, name, value):
        self.rows.append((name, value, "", INFO, None))

    @property
    def ok(self) -> bool:
        return all(r[4] is not False for r in self.rows)

    def render(self, command, config, seed) -> str:
        buf = io.StringIO()
        buf.write(f"# mechlab {__version__}\n")
        buf.write(f"# command: {command}\n")
        buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        buf.write(f"# seed: {seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "lhs", "rhs", "relation", "pass"))
        for name, lhs, rhs, rel, ok in self.rows:
            w.writerow((name, _cell(lhs), _cell(rhs), rel, "" if ok is None else _cell(ok)))
        return buf.getvalue()


def parse_vector(s: str, what: str, allow_inf: bool = False) -> tuple:
    out = []
    for k, tok in enumerate(s.split(",")):
        tok = tok.strip()
        if allow_inf and tok.lower() == "inf":
            out.append(INF)
            continue
        try:
            out.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"--{what}[{k}]: invalid rational {tok!r}") from None
    return tuple(out)


def parse_order(s: str) -> tuple:
    try:
        return tuple(int(t) for t in s.split(","))
    except ValueError:
        raise ParseError(f"--order: expected comma-separated buyer indices, got {s!r}") from None


def _buyer(inst, args):
    if not 0 <= args.buyer < inst.n:
        raise ParseError(f"--buyer {args.buyer} out of range for {inst.n} buyers")
    return inst.buyers[args.buyer]


def _costs(inst, args, required=False):
    if args.costs is not None:
        c = parse_vector(args.costs, "costs")
    else:
        c = inst.costs
    if c is not None and len(c) != inst.m:
        raise DimensionError(f"--costs has {len(c)} entries, instance has m={inst.m}")
    if required and c is None:
        raise ParseError("costs required: pass --costs or put them in the instance file")
    return c


def _certificate(t: Table, name, lp, sol):
    problems = check_certificate(lp, sol)
    t.check(name, len(problems), 0, "==", not problems)


# -- commands ---------------------------------------------------------------


def cmd_validate(args, t: Table):
    inst = read_instance(args.instance)  # raises on parse or invariant errors
    t.check("violations", len(validate_instance(inst)), 0, "==", True)
    t.info("m", inst.m)
    t.info("buyers", inst.n)
    for i, d in enumerate(inst.buyers):
        t.check(f"buyer[{i}].mass", sum(d.probs, Fraction(0)), 1, "==", sum(d.probs) == 1)


def cmd_check_buy_many(args, t: Table):
    menu = read_menu(args.menu)
    hat = hat_prices(menu)
    for k, (lam, p) in enumerate(menu):
        r = replication_cost(hat, lam)
        t.check(f"option[{k}].price", p, r, "<=", p <= r)
    w = check_buy_many(menu)
    if w is not None:
        t.info("witness", f"option {w.option}")
    t.info("hat_prices", hat)


def cmd_opt_pricing(args, t: Table):
    inst = read_instance(args.instance)
    d = _buyer(inst, args)
    c = _costs(inst, args)
    best = opt_item_pricing(d, c, guard=args.guard_opt)
    t.info("pricing", best.pricing)
    t.info("allocation", best.allocation)
    if c is None:
        t.info("srev", best.revenue)
        re = expected_revenue(d, best.pricing)
        t.check("srev.reevaluated", re, best.revenue, "==", re == best.revenue)
    else:
        t.info("sprofit", best.profit)
        re = expected_profit(d, best.pricing, c)
        t.check("sprofit.reevaluated", re, best.profit, "==", re == best.profit)


def cmd_exante(args, t: Table):
    inst = read_instance(args.instance)
    if args.x is not None:
        d = _buyer(inst, args)
        x = parse_vector(args.x, "x")
        res = exante_srev(d, x, guard=args.guard_opt)
        t.info("srev", res.revenue)
        for j in range(d.m):
            t.check(f"allocation[{j}]", res.allocation[j], x[j], "<=", res.allocation[j] <= x[j])
        t.info("duals", res.duals)
        for k, (p, w) in enumerate(res.pricing):
            t.info(f"atom[{k}]", f"{_cell(p)} w={fmt(w)}")
        _certificate(t, "lp.certificate", res.program, res.lp)
        return
    ea = exante_global(inst, guard=args.guard_opt)
    for i in range(inst.n):
        t.info(f"buyer[{i}].revenue", ea.revenues[i])
        t.info(f"buyer[{i}].allocation", ea.allocations[i])
    for j in range(inst.m):
        used = sum((a[j] for a in ea.allocations), Fraction(0))
        t.check(f"item[{j}].budget", used, 1, "<=", used <= 1)
    t.info("ea_srev", ea.total)
    total = sum(ea.revenues, Fraction(0))
    t.check("total", total, ea.total, "==", total == ea.total)
    _certificate(t, "lp.certificate", ea.program, ea.lp)


def cmd_subgradient(args, t: Table):
    inst = read_instance(args.instance)
    d = _buyer(inst, args)
    x0 = parse_vector(args.x, "x")
    rng = random.Random(args.seed)
    pts = [tuple(Fraction(rng.randint(0, 8), 8) for _ in range(d.m)) for _ in range(args.points)]
    sg = srev_subgradient(d, x0, pts, guard=args.guard_opt)
    t.info("srev", sg.value)
    for j, c in enumerate(sg.costs):
        t.check(f"cost[{j}]", c, 0, ">=", c >= 0)
    for y, lhs, rhs, ok in sg.checks:
        t.check(f"supergradient{_cell(y)}", lhs, rhs, "<=", ok)


def cmd_profit_bound(args, t: Table):
    inst = read_instance(args.instance)
    d = _buyer(inst, args)
    c = _costs(inst, args, required=True)
    menu = read_menu(args.menu)
    if args.closure:
        menu = buy_many_closure(menu)
    sp = opt_item_pricing(d, c, guard=args.guard_opt).profit
    rep = profit_bound_report(d, menu, c, sp)
    t.info("sprofit", sp)
    t.info("q", rep.q)
    t.info("original_profit_2c", rep.original_profit_2c)
    for r in rep.records:
        for name, ok in r.checks.items():
            lhs, rhs, rel = {
                "ub": (r.u_start, r.u_menu, "<="),
                "lb": (r.u_end, r.u_menu + r.profit_menu_2c / 2, ">="),
                "envelope": (r.piecewise_coef, r.alpha_profit_coef, "=="),
                "profit_identity": (r.evaluated_coef, r.alpha_profit_coef, "=="),
                "monotone_convex": (r.slopes, "", "sorted>=0"),
            }[name]
            t.check(f"type[{r.index}].{name}", lhs, rhs, rel, ok)
    t.check("chain", rep.alpha_profit_coef, rep.buy_many_profit_2c / 2, ">=", rep.checks["chain"])
    t.check("alpha_profit_le_sprofit", rep.alpha_profit_coef, f"{fmt(sp)}*ln{4 * rep.m}", "<=",
            rep.checks["alpha_profit_le_sprofit"])
    t.check("theorem", rep.buy_many_profit_2c, f"2*ln{4 * rep.m}*{fmt(sp)}", "<=", rep.checks["theorem"])
    t.info("ratio", rep.ratio)
    w = check_buy_many(menu)
    t.check("menu.buy_many", "ok" if w is None else f"option {w.option}", "ok", "==", w is None)


def cmd_decompose(args, t: Table):
    inst = read_instance(args.instance)
    d = _buyer(inst, args)
    p = parse_vector(args.prices, "prices", allow_inf=True)
    y = parse_vector(args.x, "x")
    if len(p) != d.m or len(y) != d.m:
        raise DimensionError("--prices and --x must have m entries")
    x_star = allocation_vector(d, p)
    t.info("x_star", x_star)
    dec = convex_decompose(p, d, None, y, guard=args.guard_decompose)
    for T, w in sorted(dec.weights.items()):
        t.info(f"weight[{T:0{d.m}b}]", w)
    t.check("allocation", dec.allocation, y, "==", dec.allocation == y)
    t.check("revenue", dec.revenue, dec.target_revenue, "==", dec.revenue == dec.target_revenue)
    t.check("weights.sum", sum(dec.weights.values()), 1, "==", sum(dec.weights.values()) == 1)


def cmd_sequential(args, t: Table):
    inst = read_instance(args.instance)
    order = parse_order(args.order) if args.order else tuple(range(inst.n))
    if sorted(order) != list(range(inst.n)):
        raise ParseError(f"--order {args.order} is not a permutation of 0..{inst.n - 1}")
    rep = verify_half(inst, order, guard=args.guard_dp)
    t.info("ea_srev", rep.exante.total)
    for c in rep.certificates:
        b = f"buyer[{c.buyer}]"
        t.check(f"{b}.allocation", c.allocation, c.target_allocation, "==", c.allocation == c.target_allocation)
        t.check(f"{b}.revenue", c.revenue, c.target_revenue, "==", c.revenue == c.target_revenue)
        t.check(f"{b}.availability", min(c.availability, default=Fraction(1)), Fraction(1, 2), ">=",
                all(a >= Fraction(1, 2) for a in c.availability))
        t.check(f"{b}.sold_before", c.sold_before, c.sold_budget, "==", c.sold_before == c.sold_budget)
    der = rep.derandomized
    t.check("randomized_revenue", der.randomized_revenue, rep.exante.total / 2, "==",
            rep.checks["randomized_is_half"])
    t.check("derandomized_revenue", der.revenue, der.randomized_revenue, ">=",
            rep.checks["derandomized_ge_randomized"])
    t.check("evaluation", rep.evaluation.total, der.revenue, "==", rep.checks["evaluation_matches"])
    for j, s in enumerate(rep.evaluation.item_sale_prob):
        t.check(f"item[{j}].sold", s, 1, "<=", s <= 1)
    t.check("ratio", rep.ratio, Fraction(1, 2), ">=", rep.checks["ratio_ge_half"])
    for b in rep.derandomized.pricing.order:
        t.info(f"pricing[{b}]", rep.derandomized.pricing.pricings[b].atoms[0][0])
    if args.mode == "mc":
        mc = evaluate_sequential(inst, der.pricing, mode="mc", trials=args.trials, seed=args.seed)
        err = abs(mc.total - float(der.revenue))
        t.check("mc.mean", mc.total, der.revenue, f"|diff|<={mc.half_width:.6g}", err <= mc.half_width + 1e-9)
    if args.pricing_out:
        write_sequential(der.pricing, args.pricing_out)


def cmd_gap(args, t: Table):
    m = args.m
    g = gap_instance(m, Fraction(args.eps))
    d, c = g.distribution, g.costs
    profit = expected_profit(d, g.menu, c)
    sp = opt_item_pricing(d, c, guard=args.guard_opt).profit
    w = check_buy_many(g.menu)
    t.check("menu.buy_many", "ok" if w is None else f"option {w.option}", "ok", "==", w is None)
    kept = len(strip_below_cost(g.menu, tuple(2 * x for x in c)))
    t.check("strip_2c.kept", kept, len(g.menu), "==", kept == len(g.menu))
    t.check("buy_many_profit", profit, g.analytic_profit, "==", profit == g.analytic_profit)
    t.check("sprofit", sp, 2, "<=", sp <= 2)
    ratio = profit / sp if sp else math.inf
    t.check("ratio", ratio, Fraction(m - 1, 4), ">=", ratio >= Fraction(m - 1, 4))


def _sweep_job(job):
    kind, seed = job
    return run_case(kind, seed)


def _threads() -> int:
    raw = os.environ.get("MECHLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ParseError(f"MECHLAB_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def cmd_sweep(args, t: Table):
    kinds = list(CASES) if args.kind == "all" else [args.kind]
    jobs = [(k, args.seed + i) for k in kinds for i in range(args.count)]
    workers = min(_threads(), len(jobs)) or 1
    if workers == 1:
        results = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    for kind in kinds:
        mine = [r for r in results if r.kind == kind]
        names = list(dict.fromkeys(n for r in mine for n in r.checks))
        for name in names:
            passed = sum(1 for r in mine if r.checks.get(name, True))
            if kind == "monte-carlo":
                need = math.ceil(Fraction(99, 100) * len(mine))
                t.check(f"{kind}.{name}", passed, need, ">=", passed >= need)
            else:
                t.check(f"{kind}.{name}", passed, len(mine), "==", passed == len(mine))
        for r in mine:
            if not r.ok:
                t.info(f"{kind}[seed={r.seed}]", r.detail)


COMMANDS = {
    "validate": cmd_validate,
    "check-buy-many": cmd_check_buy_many,
    "opt-pricing": cmd_opt_pricing,
    "exante": cmd_exante,
    "subgradient": cmd_subgradient,
    "profit-bound": cmd_profit_bound,
    "decompose": cmd_decompose,
    "sequential": cmd_sequential,
    "gap": cmd_gap,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mechlab", description="Exact checks for buy-many and item pricing.")
    ap.add_argument("--version", action="version", version=f"mechlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help, *flags):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--out", help="write CSV here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--guard-opt", type=int, default=DEFAULT_GUARD, help="mapping-count guard")
        sp.add_argument("--guard-dp", type=int, default=DP_GUARD, help="availability-state guard")
        sp.add_argument("--guard-decompose", type=int, default=DECOMPOSE_GUARD, help="subset-count guard")
        for f in flags:
            f(sp)
        return sp

    def instance(sp):
        sp.add_argument("--instance", required=True)

    def buyer(sp):
        sp.add_argument("--buyer", type=int, default=0, help="buyer index (default 0)")

    def costs(sp):
        sp.add_argument("--costs", help="comma-separated rationals; overrides the instance costs")

    def menu(sp):
        sp.add_argument("--menu", required=True)

    def x(required):
        def f(sp):
            sp.add_argument("--x", required=required, help="comma-separated allocation vector")
        return f

    add("validate", "check an instance file", instance)
    add("check-buy-many", "check a menu against the buy-many constraint", menu)
    add("opt-pricing", "optimal item pricing (revenue, or profit with costs)", instance, buyer, costs)
    add("exante", "ex-ante constrained revenue (one buyer with --x, else all buyers)", instance, buyer, x(False))
    sg = add("subgradient", "dual cost vector and supergradient spot checks", instance, buyer, x(True))
    sg.add_argument("--points", type=int, default=5)
    pb = add("profit-bound", "cost-doubling profit bound report", instance, buyer, costs, menu)
    pb.add_argument("--closure", action="store_true", help="replace the menu by its buy-many closure first")
    dc = add("decompose", "random restriction hitting a target allocation", instance, buyer, x(True))
    dc.add_argument("--prices", required=True, help="comma-separated prices, 'inf' withholds")
    sq = add("sequential", "half-approximate sequential pricing, derandomized", instance)
    sq.add_argument("--order", help="comma-separated buyer order (default 0..n-1)")
    sq.add_argument("--mode", choices=("exact", "mc"), default="exact")
    sq.add_argument("--trials", type=int, default=100_000)
    sq.add_argument("--pricing-out", help="write the deterministic sequential pricing here")
    gp = add("gap", "single-buyer profit gap family", lambda sp: sp.add_argument("--m", type=int, required=True))
    gp.add_argument("--eps", default="0", help="subtract this rational from every menu price")
    sw = add("sweep", "seeded random property campaign")
    sw.add_argument("--kind", choices=("all",) + tuple(CASES), default="all")
    sw.add_argument("--count", type=int, default=20)
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "command")}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t = Table()
    code = EXIT_OK
    try:
        if args.command == "gap" and args.m < 2:
            raise ParseError("--m must be at least 2")
        COMMANDS[args.command](args, t)
    except (ParseError, InvariantError, DimensionError) as e:
        print(f"mechlab: error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except GuardError as e:
        print(f"mechlab: guard exceeded: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (AssertionError, InfeasibleError) as e:
        print(f"mechlab: check failed: {e}", file=sys.stderr)
        code = EXIT_ASSERT
    if not t.ok:
        code = EXIT_ASSERT
    text = t.render(args.command, _config(args), args.seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
