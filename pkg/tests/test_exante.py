import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mechlab.errors import GuardError, InfeasibleError
from mechlab.exante import convex_decompose, exante_global, exante_srev, srev_subgradient
from mechlab.instances import random_distribution, random_instance
from mechlab.lp import check_certificate
from mechlab.model import INF, Instance, TypeDistribution, allocation_vector, expected_revenue
from mechlab.pricing import enumerate_vertex_pricings, srev
from oracles import two_atom_srev

TWO = TypeDistribution([[3, 1], [1, 3]], [F(1, 2), F(1, 2)])


def test_unconstrained_and_zero():
    assert exante_srev(TWO, (1, 1)).revenue == 3
    res = exante_srev(TWO, (0, 0))
    assert res.revenue == 0
    assert res.allocation == (0, 0)


def test_constrained_value_matches_mixture_oracle():
    x = (F(1, 4), F(1, 2))
    res = exante_srev(TWO, x)
    # oracle: best mixture of two pricings drawn from a half-integer grid
    assert res.revenue == two_atom_srev(TWO, x) == F(9, 4)
    assert all(a <= b for a, b in zip(res.allocation, x))
    assert expected_revenue(TWO, res.pricing) == res.revenue
    assert allocation_vector(TWO, res.pricing) == res.allocation


def test_unpacks_as_pair():
    pricing, revenue = exante_srev(TWO, (1, 1))
    assert revenue == 3


def test_bad_bound():
    with pytest.raises(ValueError):
        exante_srev(TWO, (2, 0))


def test_certificate_on_every_solve():
    rng = random.Random(8)
    for _ in range(20):
        d = random_distribution(rng, rng.randint(1, 3), rng.randint(1, 4))
        x = tuple(F(rng.randint(0, 4), 4) for _ in range(d.m))
        res = exante_srev(d, x)
        assert check_certificate(res.program, res.lp) == []


def test_global_two_identical_buyers():
    d = TypeDistribution.point([2])
    ea = exante_global(Instance(1, (d, d)))
    assert ea.total == 2
    assert sum(a[0] for a in ea.allocations) == 1
    assert check_certificate(ea.program, ea.lp) == []


def test_global_single_buyer_and_disjoint_buyers():
    assert exante_global(Instance(2, (TWO,))).total == srev(TWO)
    a = TypeDistribution([[3, 0], [1, 0]], [F(1, 2), F(1, 2)])
    b = TypeDistribution([[0, 2], [0, 5]], [F(1, 3), F(2, 3)])
    assert exante_global(Instance(2, (a, b))).total == srev(a) + srev(b)


def test_global_respects_budget():
    for seed in range(10):
        inst = random_instance(3, 3, 3, seed=seed)
        ea = exante_global(inst)
        for j in range(inst.m):
            assert sum(x[j] for x in ea.allocations) <= 1
        assert ea.total == sum(ea.revenues)


def test_subgradient_slack_is_zero():
    sg = srev_subgradient(TWO, (1, 1))
    assert sg.costs == (0, 0) and sg.ok


def test_subgradient_examples():
    sg = srev_subgradient(TWO, (F(1, 2), F(1, 4)))
    assert sg.ok
    assert sg.costs == (0, 3)
    sg = srev_subgradient(TypeDistribution.point([2]), (F(1, 2),))
    assert sg.costs == (2,)
    for y in [(0,), (F(1, 3),), (1,)]:
        assert exante_srev(TypeDistribution.point([2]), y).revenue == 2 * min(y[0], 1)


def test_decompose_example():
    p = (F(2), F(2))
    dec = convex_decompose(p, TWO, {0b11: F(1)}, (F(1, 4), F(1, 2)))
    assert dec.weights == {0b11: F(1, 2), 0b10: F(1, 2)}
    assert dec.exact
    assert dec.revenue == F(3, 2)


def test_decompose_endpoints():
    p = (F(2), F(2))
    dec = convex_decompose(p, TWO, None, allocation_vector(TWO, p))
    assert dec.weights == {0b11: 1}
    dec = convex_decompose(p, TWO, None, (0, 0))
    assert dec.weights == {0: 1} and dec.revenue == 0


def test_decompose_withheld_item_and_errors():
    p = (F(2), INF)
    dec = convex_decompose(p, TWO, None, (F(1, 4), 0))
    assert dec.exact
    with pytest.raises(InfeasibleError):
        convex_decompose(p, TWO, None, (F(1, 4), F(1, 4)))
    with pytest.raises(GuardError):
        convex_decompose((F(1),) * 3, TypeDistribution.point([1, 1, 1]), None, (0, 0, 0), guard=4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_srev_monotone_in_budget(seed):
    rng = random.Random(seed)
    d = random_distribution(rng, rng.randint(1, 3), rng.randint(1, 3))
    verts = enumerate_vertex_pricings(d)
    x = tuple(F(rng.randint(0, 8), 8) for _ in range(d.m))
    y = tuple(min(F(1), a + F(rng.randint(0, 4), 8)) for a in x)
    assert exante_srev(d, x, vertices=verts).revenue <= exante_srev(d, y, vertices=verts).revenue


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_full_budget_equals_unconstrained(seed):
    rng = random.Random(seed)
    d = random_distribution(rng, rng.randint(1, 3), rng.randint(1, 4))
    assert exante_srev(d, (1,) * d.m).revenue == srev(d)
