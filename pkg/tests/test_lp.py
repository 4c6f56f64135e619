import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mechlab.errors import DimensionError, InfeasibleError, UnboundedError
from mechlab.lp import EQ, GE, LE, LinearProgram, check_certificate, lp_solve
from oracles import vertex_lp_max


def test_single_bound():
    sol = lp_solve(LinearProgram([1], [[1]], [LE], [3]))
    assert sol.value == 3 and sol.x == [3]


def test_simplex_dual():
    sol = lp_solve(LinearProgram([1, 1], [[1, 1]], [LE], [1]))
    assert sol.value == 1
    assert sol.duals == [1]


def test_equality_and_ge_rows():
    # max x + 2y s.t. x + y = 4, x >= 1, y <= 2
    sol = lp_solve(LinearProgram([1, 2], [[1, 1], [1, 0], [0, 1]], [EQ, GE, LE], [4, 1, 2]))
    assert sol.value == 6 and sol.x == [2, 2]
    assert sol.duals == [1, 0, 1]


def test_minimize():
    sol = lp_solve(LinearProgram([2, 3], [[1, 1]], [GE], [5], sense="min"))
    assert sol.value == 10
    # raising the right-hand side by one costs 2 more
    assert sol.duals == [2]


def test_free_variable():
    sol = lp_solve(LinearProgram([1], [[1], [-1]], [LE, LE], [F(-1, 2), 3], free={0}))
    assert sol.value == F(-1, 2)


def test_negative_rhs_normalised():
    sol = lp_solve(LinearProgram([-1], [[-1]], [LE], [-2]))
    assert sol.value == -2


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleError):
        lp_solve(LinearProgram([1], [[1], [1]], [LE, GE], [1, 2]))
    with pytest.raises(UnboundedError):
        lp_solve(LinearProgram([1, 0], [[0, 1]], [LE], [1]))


def test_redundant_equalities():
    sol = lp_solve(LinearProgram([1, 1], [[1, 1], [2, 2], [1, 0]], [EQ, EQ, LE], [2, 4, 1]))
    assert sol.value == 2


def test_shape_errors():
    with pytest.raises(DimensionError):
        LinearProgram([1, 2], [[1]], [LE], [1])
    with pytest.raises(ValueError):
        LinearProgram([1], [[1]], ["<"], [1])


def test_certificate_detects_bad_solution():
    lp = LinearProgram([1, 1], [[1, 1]], [LE], [1])
    sol = lp_solve(lp)
    sol.x = [F(1), F(1)]
    assert check_certificate(lp, sol)


def _random_lp(rng):
    n, k = rng.randint(1, 4), rng.randint(1, 4)
    A = [[F(rng.randint(-2, 4)) for _ in range(n)] for _ in range(k)]
    rel = [rng.choice([LE, LE, GE, EQ]) for _ in range(k)]
    b = [F(rng.randint(0, 8)) for _ in range(k)]
    # a box keeps every instance bounded
    A += [[F(int(i == j)) for j in range(n)] for i in range(n)]
    rel += [LE] * n
    b += [F(rng.randint(1, 6))] * n
    c = [F(rng.randint(-3, 5)) for _ in range(n)]
    return LinearProgram(c, A, rel, b)


def test_against_vertex_enumeration():
    rng = random.Random(11)
    seen = 0
    for _ in range(150):
        lp = _random_lp(rng)
        ref = vertex_lp_max(lp.c, lp.A, lp.rel, lp.b)
        if ref is None:
            with pytest.raises(InfeasibleError):
                lp_solve(lp)
            continue
        sol = lp_solve(lp)
        assert sol.value == ref
        assert check_certificate(lp, sol) == []
        seen += 1
    assert seen > 80


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_duals_are_shadow_prices(seed):
    rng = random.Random(seed)
    lp = _random_lp(rng)
    try:
        sol = lp_solve(lp)
    except InfeasibleError:
        return
    # the optimal value is concave in b, so the dual is a supergradient of it
    i = rng.randrange(len(lp.b))
    step = F(rng.choice([-1, 1]), rng.randint(1, 4))
    b2 = list(lp.b)
    b2[i] += step
    try:
        moved = lp_solve(LinearProgram(lp.c, lp.A, lp.rel, b2)).value
    except InfeasibleError:
        return
    assert moved <= sol.value + sol.duals[i] * step
