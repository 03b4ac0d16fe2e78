"""Online bipartite matching via RANKING, its posted-price market form, and
Monte Carlo experiments that verify the 1 - 1/e guarantee edge by edge."""

from .analysis import (
    GUARANTEE,
    CounterfactualResult,
    EstimateWithCI,
    LastBuyerReport,
    PropertyCheck,
    PropertySweep,
    WelfareBound,
    aux_rng,
    check_counterfactual_properties,
    check_monotone_availability,
    check_welfare_bound,
    counterfactual,
    edge_guarantee_sweep,
    estimate_competitive_ratio,
    estimate_edge_guarantee,
    estimate_matching_size,
    last_buyer_report,
    property_sweep,
    trial_rng,
)
from .instance import (
    ArrivalOrder,
    BipartiteInstance,
    RightPermutation,
    kvv_hard_instance,
    make_instance,
    parse,
    random_bipartite,
    serialize,
    without_right_vertex,
)
from .market import (
    MarketOutcome,
    PriceAssignment,
    PriceScheme,
    draw_weights,
    permutation_from_prices,
    prices_from_weights,
    run_market,
    welfare_decomposition,
)
from .matchers import (
    Matching,
    brute_force_max_size,
    exact_ranking_expectation,
    greedy,
    maximum_matching,
    random_greedy,
    ranking,
    validate_matching,
)

__version__ = "0.1.0"

__all__ = [
    "GUARANTEE",
    "ArrivalOrder",
    "BipartiteInstance",
    "CounterfactualResult",
    "EstimateWithCI",
    "LastBuyerReport",
    "MarketOutcome",
    "Matching",
    "PriceAssignment",
    "PriceScheme",
    "PropertyCheck",
    "PropertySweep",
    "RightPermutation",
    "WelfareBound",
    "aux_rng",
    "brute_force_max_size",
    "check_counterfactual_properties",
    "check_monotone_availability",
    "check_welfare_bound",
    "counterfactual",
    "draw_weights",
    "edge_guarantee_sweep",
    "estimate_competitive_ratio",
    "estimate_edge_guarantee",
    "estimate_matching_size",
    "exact_ranking_expectation",
    "greedy",
    "kvv_hard_instance",
    "last_buyer_report",
    "make_instance",
    "maximum_matching",
    "parse",
    "permutation_from_prices",
    "prices_from_weights",
    "property_sweep",
    "random_bipartite",
    "random_greedy",
    "ranking",
    "run_market",
    "serialize",
    "trial_rng",
    "validate_matching",
    "welfare_decomposition",
    "without_right_vertex",
]
