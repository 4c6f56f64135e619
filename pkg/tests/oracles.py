"""Slow, independent reference computations used only by the tests.

Nothing here shares code paths with the fast implementations beyond the
core-model evaluators (best responses and expectations), which are simple
enough to check by hand.
"""

from fractions import Fraction
from itertools import combinations, product

from mechlab.lp import EQ, GE, LE, LinearProgram, lp_solve
from mechlab.model import INF, best_response_items, expected_profit, expected_revenue


def _solve_square(M, rhs):
    """Gauss-Jordan over Fractions; None when singular."""
    k = len(M)
    A = [list(row) + [r] for row, r in zip(M, rhs)]
    for col in range(k):
        piv = next((r for r in range(col, k) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        for r in range(k):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[r][k] for r in range(k)]


def _independent_rows(rows, rhs):
    """Drop linearly dependent equality rows; (None, None) if the system is inconsistent."""
    basis, keep = [], []  # reduced rows with their pivot column
    for row, r in zip(rows, rhs):
        red = list(row) + [r]
        for piv, brow in basis:
            if red[piv] != 0:
                f = red[piv] / brow[piv]
                red = [a - f * b for a, b in zip(red, brow)]
        piv = next((j for j, a in enumerate(red[:-1]) if a != 0), None)
        if piv is None:
            if red[-1] != 0:
                return None, None
            continue
        basis.append((piv, red))
        keep.append((row, r))
    return [k[0] for k in keep], [k[1] for k in keep]


def vertex_lp_max(c, A, rel, b):
    """max c.x over x >= 0 by enumerating every basic solution (bounded LPs only)."""
    n = len(c)
    rows = []
    slack_rows = [i for i, r in enumerate(rel) if r != EQ]
    width = n + len(slack_rows)
    for i, (row, r) in enumerate(zip(A, rel)):
        full = [Fraction(a) for a in row] + [Fraction(0)] * len(slack_rows)
        if r != EQ:
            full[n + slack_rows.index(i)] = Fraction(1 if r == LE else -1)
        rows.append(full)
    rows, rhs = _independent_rows(rows, [Fraction(x) for x in b])
    if rows is None:
        return None
    k = len(rows)
    best = None
    for basis in combinations(range(width), k):
        M = [[row[j] for j in basis] for row in rows]
        sol = _solve_square(M, rhs)
        if sol is None or any(s < 0 for s in sol):
            continue
        x = [Fraction(0)] * width
        for j, s in zip(basis, sol):
            x[j] = s
        val = sum((Fraction(ci) * xi for ci, xi in zip(c, x[:n])), Fraction(0))
        if best is None or val > best:
            best = val
    return best


def mapping_oracle(d, costs=None):
    """Best item pricing by solving one LP per choice mapping with the simplex solver.

    Returns (objective, pricing).  Objective is revenue, or profit with costs.
    """
    m = d.m
    c = costs if costs is not None else (Fraction(0),) * m
    best_val, best_p = Fraction(0), (INF,) * m
    for mapping in product([None] + list(range(m)), repeat=len(d)):
        opened = sorted({j for j in mapping if j is not None})
        if not opened:
            continue
        idx = {j: a for a, j in enumerate(opened)}
        A, rel, b = [], [], []

        def row(plus, minus=None):
            r = [Fraction(0)] * len(opened)
            r[idx[plus]] += 1
            if minus is not None:
                r[idx[minus]] -= 1
            return r

        for (v, _), j in zip(d, mapping):
            if j is None:
                for k in opened:
                    A.append(row(k))
                    rel.append(GE)
                    b.append(v[k])
            else:
                A.append(row(j))
                rel.append(LE)
                b.append(v[j])
                for k in opened:
                    if k != j:
                        A.append(row(j, k))
                        rel.append(LE)
                        b.append(v[j] - v[k])
        obj = [Fraction(0)] * len(opened)
        for (_, pr), j in zip(d, mapping):
            if j is not None:
                obj[idx[j]] += pr
        try:
            sol = lp_solve(LinearProgram(obj, A, rel, b))
        except ArithmeticError:
            continue
        p = [INF] * m
        for j in opened:
            p[j] = sol.x[idx[j]]
        p = tuple(p)
        val = expected_profit(d, p, c) if costs is not None else expected_revenue(d, p)
        if val > best_val:
            best_val, best_p = val, p
    return best_val, best_p


def price_grid(d, step=Fraction(1, 2)):
    top = max((x for v in d.values for x in v), default=Fraction(0))
    k = int(top / step) + 1
    return [step * i for i in range(k + 1)] + [INF]


def grid_oracle(d, costs=None, step=Fraction(1, 2)):
    """Best objective over all pricings on a price grid (a lower bound on the optimum)."""
    grid = price_grid(d, step)
    best = Fraction(0)
    for p in product(grid, repeat=d.m):
        val = expected_profit(d, p, costs) if costs is not None else expected_revenue(d, p)
        best = max(best, val)
    return best


def two_atom_srev(d, x, step=Fraction(1, 2)):
    """Best mixture of at most two grid pricings whose expected allocation is <= x."""
    from mechlab.model import allocation_vector

    pts = []
    for p in product(price_grid(d, step), repeat=d.m):
        pts.append((expected_revenue(d, p), allocation_vector(d, p)))
    best = Fraction(0)
    for ra, xa in pts:
        if all(a <= b for a, b in zip(xa, x)):
            best = max(best, ra)
    for (ra, xa), (rb, xb) in combinations(pts, 2):
        lo, hi = Fraction(0), Fraction(1)
        for a, bb, cap in zip(xa, xb, x):
            # w * (a - bb) <= cap - bb
            diff, room = a - bb, cap - bb
            if diff > 0:
                hi = min(hi, room / diff)
            elif diff < 0:
                lo = max(lo, room / diff)
            elif room < 0:
                lo, hi = Fraction(1), Fraction(0)
        if lo > hi:
            continue
        for w in (lo, hi):
            best = max(best, w * ra + (1 - w) * rb)
    return best


def brute_sequential(inst, seq):
    """Expected revenue and sale probabilities by enumerating every joint realization."""
    per_buyer = []
    for b in seq.order:
        d, rp = inst.buyers[b], seq.pricings[b]
        per_buyer.append((b, [(w * pv, p, v) for p, w in rp for v, pv in d]))
    total = Fraction(0)
    sold = [Fraction(0)] * inst.m
    for combo in product(*[outs for _, outs in per_buyer]):
        prob = Fraction(1)
        S = set(range(inst.m))
        rev = Fraction(0)
        for pr, p, v in combo:
            prob *= pr
        if prob == 0:
            continue
        for pr, p, v in combo:
            ch = best_response_items(v, p, S)
            if ch.choice is not None:
                S.discard(ch.choice)
                rev += ch.payment
                sold[ch.choice] += prob
        total += prob * rev
    return total, tuple(sold)
