"""Exact rational two-phase simplex with dual extraction.

Dense tableau, Bland's rule (exact arithmetic makes it terminate).  Duals are
reported as shadow prices: ``duals[i]`` is the rate of change of the optimal
value with respect to ``b[i]``, for both maximization and minimization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionError, InfeasibleError, UnboundedError

LE, EQ, GE = "<=", "=", ">="
_FLIP = {LE: GE, GE: LE, EQ: EQ}


@dataclass
class LinearProgram:
    """``sense`` c.x subject to A[i].x rel[i] b[i]; x >= 0 except indices in ``free``."""

    c: list
    A: list
    rel: list
    b: list
    free: frozenset = field(default_factory=frozenset)
    sense: str = "max"

    def __post_init__(self):
        self.c = [Fraction(v) for v in self.c]
        self.A = [[Fraction(v) for v in row] for row in self.A]
        self.b = [Fraction(v) for v in self.b]
        self.rel = list(self.rel)
        self.free = frozenset(self.free)
        n = len(self.c)
        if len(self.A) != len(self.b) or len(self.rel) != len(self.b):
            raise DimensionError("A, rel and b must have one entry per row")
        for row in self.A:
            if len(row) != n:
                raise DimensionError(f"constraint row has {len(row)} entries, expected {n}")
        for r in self.rel:
            if r not in _FLIP:
                raise ValueError(f"unknown relation {r!r}")
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")

    @property
    def n_vars(self) -> int:
        return len(self.c)


@dataclass
class LPSolution:
    value: Fraction
    x: list
    duals: list
    pivots: int = 0


def _pivot(T, r, col):
    piv = T[r][col]
    row = [a / piv for a in T[r]]
    T[r] = row
    for i, other in enumerate(T):
        f = other[col]
        if i != r and f != 0:
            T[i] = [a - f * b for a, b in zip(other, row)]


def _run(T, basis, allowed, max_pivots=100000):
    """Iterate until the objective row (T[-1]) has no negative reduced cost."""
    rows = len(T) - 1
    count = 0
    while True:
        obj = T[-1]
        enter = next((j for j in allowed if obj[j] < 0), None)
        if enter is None:
            return count
        best = None
        for i in range(rows):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise UnboundedError("objective is unbounded")
        _pivot(T, best[1], enter)
        basis[best[1]] = enter
        count += 1
        if count > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")


def lp_solve(lp: LinearProgram, verify: bool = True) -> LPSolution:
    """Solve ``lp`` exactly.  Raises InfeasibleError or UnboundedError."""
    sign = 1 if lp.sense == "max" else -1
    n = lp.n_vars
    # structural columns: x_j (or x_j^+ and x_j^- when free)
    cols = []  # (original index, coefficient sign)
    for j in range(n):
        cols.append((j, 1))
        if j in lp.free:
            cols.append((j, -1))
    rows = len(lp.b)
    flipped = [b < 0 for b in lp.b]
    rels = [_FLIP[r] if f else r for r, f in zip(lp.rel, flipped)]
    n_struct = len(cols)
    n_slack = sum(1 for r in rels if r != EQ)
    n_art = sum(1 for r in rels if r != LE)
    width = n_struct + n_slack + n_art
    T = []
    basis = []
    ident = []  # column holding +e_i for row i
    art_cols = set()
    s_at, a_at = n_struct, n_struct + n_slack
    for i in range(rows):
        f = -1 if flipped[i] else 1
        row = [Fraction(0)] * (width + 1)
        for k, (j, sg) in enumerate(cols):
            row[k] = f * sg * lp.A[i][j]
        row[-1] = f * lp.b[i]
        if rels[i] == LE:
            row[s_at] = Fraction(1)
            basis.append(s_at)
            ident.append(s_at)
            s_at += 1
        else:
            if rels[i] == GE:
                row[s_at] = Fraction(-1)
                s_at += 1
            row[a_at] = Fraction(1)
            basis.append(a_at)
            ident.append(a_at)
            art_cols.add(a_at)
            a_at += 1
        T.append(row)

    pivots = 0
    if art_cols:
        obj = [Fraction(0)] * (width + 1)
        for i in range(rows):
            if basis[i] in art_cols:
                obj = [o - a for o, a in zip(obj, T[i])]
        for a in art_cols:
            obj[a] = Fraction(0)
        T.append(obj)
        pivots += _run(T, basis, range(width))
        if T[-1][-1] < 0:
            raise InfeasibleError("linear program is infeasible")
        T.pop()
        # drive zero-level artificials out of the basis where possible; rows
        # that cannot be cleared are redundant and stay inert
        for i in range(rows):
            if basis[i] in art_cols:
                j = next((j for j in range(n_struct + n_slack) if T[i][j] != 0), None)
                if j is not None:
                    _pivot(T, i, j)
                    basis[i] = j
                    pivots += 1

    cost = [Fraction(0)] * width
    for k, (j, sg) in enumerate(cols):
        cost[k] = sign * sg * lp.c[j]
    obj = [Fraction(0)] * (width + 1)
    for j in range(width):
        obj[j] = -cost[j]
    for i in range(rows):
        cb = cost[basis[i]]
        if cb != 0:
            obj = [o + cb * a for o, a in zip(obj, T[i])]
    T.append(obj)
    pivots += _run(T, basis, [j for j in range(width) if j not in art_cols])

    level = [Fraction(0)] * width
    for i in range(rows):
        level[basis[i]] = T[i][-1]
    x = [Fraction(0)] * n
    for k, (j, sg) in enumerate(cols):
        x[j] += sg * level[k]
    duals = []
    for i in range(rows):
        y = T[-1][ident[i]]  # c_B B^-1 e_i
        if flipped[i]:
            y = -y
        duals.append(sign * y)
    value = sum((cj * xj for cj, xj in zip(lp.c, x)), Fraction(0))
    sol = LPSolution(value, x, duals, pivots)
    if verify:
        problems = check_certificate(lp, sol)
        if problems:
            raise AssertionError("LP certificate failed: " + "; ".join(problems))
    return sol


def check_certificate(lp: LinearProgram, sol: LPSolution) -> list[str]:
    """Primal feasibility, dual feasibility, complementary slackness and strong duality."""
    out = []
    x, y = sol.x, sol.duals
    sign = 1 if lp.sense == "max" else -1
    for j, xj in enumerate(x):
        if j not in lp.free and xj < 0:
            out.append(f"x[{j}] < 0")
    for i, (row, r, b) in enumerate(zip(lp.A, lp.rel, lp.b)):
        ax = sum((a * xj for a, xj in zip(row, x)), Fraction(0))
        slack = b - ax
        if (r == LE and slack < 0) or (r == GE and slack > 0) or (r == EQ and slack != 0):
            out.append(f"row {i} violated")
        # shadow-price sign conventions, stated for the max form
        ys = sign * y[i]
        if (r == LE and ys < 0) or (r == GE and ys > 0):
            out.append(f"dual {i} has the wrong sign")
        if slack != 0 and y[i] != 0:
            out.append(f"complementary slackness fails on row {i}")
    for j in range(lp.n_vars):
        red = sign * (lp.c[j] - sum((lp.A[i][j] * y[i] for i in range(len(lp.b))), Fraction(0)))
        if j in lp.free:
            if red != 0:
                out.append(f"reduced cost of free x[{j}] is nonzero")
        else:
            if red > 0:
                out.append(f"reduced cost of x[{j}] is positive")
            if red != 0 and x[j] != 0:
                out.append(f"complementary slackness fails on x[{j}]")
    primal = sum((c * xj for c, xj in zip(lp.c, x)), Fraction(0))
    dual = sum((b * yi for b, yi in zip(lp.b, y)), Fraction(0))
    if primal != dual or primal != sol.value:
        out.append(f"duality gap: primal {primal} vs dual {dual}")
    return out
