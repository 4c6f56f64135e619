import random
from fractions import Fraction as F

import pytest

from mechlab.errors import GuardError
from mechlab.exante import ExAnteSolution, exante_global
from mechlab.instances import gap_instance, random_instance
from mechlab.model import INF, Instance, RandomItemPricing, TypeDistribution, expected_revenue
from mechlab.sequential import (
    SequentialPricing,
    availability_dp,
    build_sequential,
    derandomize,
    evaluate_sequential,
    verify_half,
)
from oracles import brute_sequential

ONE = TypeDistribution.point([2])
PAIR = Instance(1, (ONE, ONE))
HALF_AT_TWO = RandomItemPricing((((F(2),), F(1, 2)), ((INF,), F(1, 2))))
SPLIT = ExAnteSolution([HALF_AT_TWO, HALF_AT_TWO], [(F(1, 2),), (F(1, 2),)], [F(1), F(1)], F(2))


def test_order_must_be_permutation():
    with pytest.raises(ValueError):
        SequentialPricing((0, 0), [(F(1),), (F(1),)])


def test_availability_first_buyer():
    seq = SequentialPricing((0, 1), [(F(2),), (F(2),)])
    assert availability_dp(PAIR, seq, 0) == {1: 1}


def test_availability_after_coin_flip():
    seq = SequentialPricing((0, 1), [HALF_AT_TWO, (F(2),)])
    assert availability_dp(PAIR, seq, 1) == {1: F(1, 2), 0: F(1, 2)}


def test_availability_two_items():
    d = TypeDistribution.point([3, 1])
    inst = Instance(2, (d, d))
    seq = SequentialPricing((0, 1), [(F(1), F(1)), (F(1), F(1))])
    assert availability_dp(inst, seq, 1) == {0b10: 1}


def test_availability_guard():
    d = TypeDistribution.point([1] * 17)
    seq = SequentialPricing((0,), [(F(1),) * 17])
    with pytest.raises(GuardError):
        availability_dp(Instance(17, (d,)), seq, 0)


def test_build_split_example():
    seq, certs = build_sequential(PAIR, SPLIT, (0, 1))
    assert [c.ok for c in certs] == [True, True]
    assert certs[0].allocation == (F(1, 4),) and certs[0].revenue == F(1, 2)
    assert certs[1].availability == (F(3, 4),)
    assert certs[1].allocation == (F(1, 4),) and certs[1].revenue == F(1, 2)
    assert evaluate_sequential(PAIR, seq).total == 1


def test_build_single_buyer_is_half():
    d = TypeDistribution([[3, 1], [1, 3]], [F(1, 2), F(1, 2)])
    inst = Instance(2, (d,))
    ea = exante_global(inst)
    seq, certs = build_sequential(inst, ea)
    assert certs[0].ok
    assert evaluate_sequential(inst, seq).total == ea.total / 2


def test_build_gap_style_two_buyers():
    g = gap_instance(3).distribution
    inst = Instance(3, (g, g))
    ea = exante_global(inst)
    _, certs = build_sequential(inst, ea, (1, 0))
    for c in certs:
        assert c.allocation == c.target_allocation
        assert c.revenue == c.target_revenue


def test_derandomize_split_example():
    seq, _ = build_sequential(PAIR, SPLIT, (0, 1))
    der = derandomize(PAIR, seq)
    assert der.randomized_revenue == 1
    # selling at 2 to the first buyer is worth 2, withholding leaves 2/3
    assert der.conditionals[0] == [F(2, 3), F(2)]
    assert der.revenue == 2 >= der.randomized_revenue
    assert der.pricing.deterministic


def test_derandomize_identical_atoms():
    p = (F(2),)
    rp = RandomItemPricing(((p, F(1, 3)), (p, F(2, 3))))
    der = derandomize(PAIR, SequentialPricing((0, 1), [rp, rp]))
    assert der.pricing.pricings[0].atoms[0][0] == p


def test_derandomize_prefers_positive_atom():
    rp = RandomItemPricing((((INF,), F(1, 2)), ((F(1),), F(1, 2))))
    inst = Instance(1, (ONE,))
    der = derandomize(inst, SequentialPricing((0,), [rp]))
    assert der.pricing.pricings[0].atoms[0][0] == (1,)


def test_evaluate_single_buyer_matches_core_model():
    d = TypeDistribution([[3, 1], [1, 3]], [F(1, 2), F(1, 2)])
    p = (F(2), F(5, 2))
    rep = evaluate_sequential(Instance(2, (d,)), SequentialPricing((0,), [p]))
    assert rep.total == expected_revenue(d, p)


def test_evaluate_against_enumeration():
    rng = random.Random(2)
    for k in range(25):
        inst = random_instance(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3), seed=k)
        seq, _ = build_sequential(inst, exante_global(inst), list(range(inst.n))[::-1])
        rep = evaluate_sequential(inst, seq)
        total, sold = brute_sequential(inst, seq)
        assert rep.total == total == sum(rep.per_buyer)
        assert rep.item_sale_prob == sold
        assert all(s <= 1 for s in sold)


def test_monte_carlo_split_example():
    seq, _ = build_sequential(PAIR, SPLIT, (0, 1))
    rep = evaluate_sequential(PAIR, seq, mode="mc", trials=100_000, seed=12)
    assert rep.mode == "mc" and rep.trials == 100_000
    assert abs(rep.total - 1) <= rep.half_width
    again = evaluate_sequential(PAIR, seq, mode="mc", trials=100_000, seed=12)
    assert again.total == rep.total


def test_unknown_mode():
    with pytest.raises(ValueError):
        evaluate_sequential(PAIR, SequentialPricing((0, 1), [(F(1),), (F(1),)]), mode="fast")


def test_verify_half_examples():
    rep = verify_half(Instance(1, (ONE,)))
    assert rep.ok and rep.ratio >= F(1, 2)
    rep = verify_half(PAIR, (0, 1), SPLIT)
    assert rep.derandomized.randomized_revenue == rep.exante.total / 2
    assert rep.ok and rep.ratio == 1


def test_verify_half_zero_instance():
    rep = verify_half(Instance(1, (TypeDistribution.point([0]),)))
    assert rep.ratio == 1 and rep.ok


def test_verify_half_disjoint_buyers():
    a = TypeDistribution([[4, 0], [2, 0]], [F(1, 2), F(1, 2)])
    b = TypeDistribution([[0, 3], [0, 1]], [F(1, 4), F(3, 4)])
    rep = verify_half(Instance(2, (a, b)), (1, 0))
    assert rep.ok
    assert rep.ratio > F(1, 2)
