"""Exact computation and verification for buy-many mechanisms and item pricing."""

__version__ = "0.1.0"

from .buymany import (
    ProfitBoundReport,
    UtilityCurve,
    buy_many_closure,
    check_buy_many,
    derived_item_pricing_q,
    hat_prices,
    profit_bound_report,
    q_alpha,
    strip_below_cost,
    utility_curve,
    with_repeat_purchases,
)
from .errors import (
    DimensionError,
    GuardError,
    InfeasibleError,
    InvariantError,
    MechlabError,
    ParseError,
    UnboundedError,
)
from .exante import convex_decompose, exante_global, exante_srev, srev_subgradient
from .instances import gap_instance, random_instance, read_instance, read_menu, write_instance, write_menu
from .lp import LinearProgram, lp_solve
from .model import (
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
    validate_instance,
)
from .pricing import enumerate_vertex_pricings, opt_item_pricing, sprofit, srev
from .sequential import (
    SequentialPricing,
    availability_dp,
    build_sequential,
    derandomize,
    evaluate_sequential,
    verify_half,
)
