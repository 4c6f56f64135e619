from fractions import Fraction as F

import pytest

from mechlab.errors import DimensionError
from mechlab.instances import gap_instance
from mechlab.model import (
    INF,
    Instance,
    LotteryMenu,
    RandomItemPricing,
    TypeDistribution,
    allocation_vector,
    best_response_items,
    best_response_menu,
    expected_profit,
    expected_revenue,
    frac,
    lottery_value,
    restrict,
    validate_instance,
    validate_random_pricing,
)

TWO = TypeDistribution([[3, 1], [1, 3]], [F(1, 2), F(1, 2)])


def test_lottery_value():
    assert lottery_value([3, 1], [F(1, 2), F(1, 2)]) == 2
    assert lottery_value([5, 0], [0, 0]) == 0
    assert lottery_value([4, 4, 0, 0], [F(1, 2), F(1, 2), 0, 0]) == 4


def test_frac_rejects_floats():
    with pytest.raises(TypeError):
        frac(0.5)


def test_best_response_menu_gap_type_two():
    g = gap_instance(4)
    ch = best_response_menu([4, 4, 0, 0], g.menu)
    assert ch.choice == 0 and ch.utility == 0 and ch.payment == 4


def test_best_response_menu_zero_type_and_tie():
    menu = LotteryMenu((([F(1, 2), F(1, 2)], 1),), 2)
    assert best_response_menu([0, 0], menu).choice is None
    one = LotteryMenu((([1], 1),), 1)
    ch = best_response_menu([1], one)
    assert (ch.choice, ch.utility, ch.payment) == (0, 0, 1)


def test_best_response_menu_margin_breaks_ties():
    # equal utility and price: the option with the larger margin wins
    menu = LotteryMenu((([1, 0], 2), ([0, 1], 2)), 2)
    assert best_response_menu([2, 2], menu, costs=[1, 0]).choice == 1
    assert best_response_menu([2, 2], menu).choice == 0


def test_best_response_items():
    p = (F(2), F(2))
    ch = best_response_items([3, 1], p, {0, 1})
    assert (ch.choice, ch.utility, ch.payment) == (0, 1, 2)
    assert best_response_items([3, 1], p, {1}).choice is None
    ch = best_response_items([5, 5], (F(3), F(3)))
    assert (ch.choice, ch.utility, ch.payment) == (0, 2, 3)


def test_best_response_withheld_item():
    assert best_response_items([9, 1], (INF, F(1))).choice == 1


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        best_response_items([1, 2, 3], (F(1), F(1)))


def test_expected_revenue_examples():
    p = (F(2), F(2))
    assert expected_revenue(TWO, p, {0b10: F(1)}) == 1
    assert expected_revenue(TWO, p) == 2
    rp = RandomItemPricing(((p, F(1, 2)), (restrict(p, 0b10), F(1, 2))))
    assert expected_revenue(TWO, rp) == F(3, 2)
    zero = TypeDistribution.point([0, 0])
    assert expected_revenue(zero, p) == 0


def test_restricted_availability_only_item_two():
    # only item 2 on the shelf: the (1,3) type buys it at 2, the (3,1) type declines
    p = (F(2), F(2))
    assert allocation_vector(TWO, p, {0b10: F(1)}) == (0, F(1, 2))


def test_expected_profit_examples():
    assert expected_profit(TypeDistribution.point([1]), (F(1),), [1]) == 0
    assert expected_profit(TWO, (F(2), F(2)), [0, 0]) == expected_revenue(TWO, (F(2), F(2)))


def test_gap_menu_profit_oracle():
    # Each type's choice worked out by hand: v^(4) = (16,0,0,4) gets 8 - 6 = 2 > 0 from
    # option 2 but 0 from its own option, so it buys option 2 (profit 2 at costs c).
    g = gap_instance(4)
    hand = F(1, 4) * 2 + F(1, 8) * 4 + F(1, 16) * 2
    assert expected_profit(g.distribution, g.menu, g.costs) == hand == F(9, 8)


def test_allocation_vector_examples():
    p = (F(2), F(2))
    assert allocation_vector(TWO, p) == (F(1, 2), F(1, 2))
    assert allocation_vector(TWO, restrict(p, 0b01)) == (F(1, 2), 0)
    assert allocation_vector(TWO, (INF, INF)) == (0, 0)


def test_validate_instance():
    assert validate_instance(gap_instance(4).instance) == []
    short = Instance(1, (TypeDistribution([[1], [2]], [F(1, 2), F(2, 5)]),))
    assert any("distribution mass != 1" in s for s in validate_instance(short))
    neg = Instance(1, (TypeDistribution([[-1]], [F(1)]),))
    assert any("value < 0" in s for s in validate_instance(neg))


def test_validate_random_pricing():
    bad = RandomItemPricing((((F(1),), F(1, 2)),))
    assert validate_random_pricing(bad)
    assert validate_random_pricing(RandomItemPricing.deterministic((F(1),))) == []
