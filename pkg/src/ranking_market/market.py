"""The posted-price market form of RANKING.

Items carry prices derived from independent uniform weights; buyers arrive
in a given order and purchase the cheapest available neighbor. With the
exponential price curve p = e^(w-1) the process is the economic reading of
RANKING: sorting items by price induces a uniformly random priority
permutation, so the produced matching coincides with RANKING's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .instance import ArrivalOrder, BipartiteInstance, RightPermutation
from .matchers import Matching, _assign_min_score, _check_sigma


class PriceScheme(Enum):
    EXPONENTIAL = "exp"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class PriceAssignment:
    """Per-item weights and the prices they induce under a named scheme.

    Exponential: p = e^(w-1), so p is in [1/e, 1]. Uniform: p = w. Both are
    strictly increasing in w, so they induce the same item ordering.
    """

    weights: tuple[float, ...]
    prices: tuple[float, ...]
    scheme: PriceScheme

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class MarketOutcome:
    """A market run's matching together with its utility/revenue accounting.

    utils[i] is 1 - p_j if buyer i bought item j, else 0; revs[j] is p_j if
    item j sold, else 0; purchased is the set of sold items.
    """

    matching: Matching
    utils: tuple[float, ...]
    revs: tuple[float, ...]
    purchased: frozenset[int]


def draw_weights(n: int, seed) -> np.ndarray:
    """n independent uniform draws in [0, 1) (53-bit doubles), deterministic
    given the seed."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.random.default_rng(seed).random(n)


def prices_from_weights(weights, scheme: PriceScheme) -> PriceAssignment:
    """Price every item from its weight under the given scheme. Weights must
    lie in [0, 1]; w = 1 is allowed for hand-built boundary cases."""
    ws = tuple(float(w) for w in weights)
    for w in ws:
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"weight {w} outside [0, 1]")
    if scheme is PriceScheme.EXPONENTIAL:
        prices = tuple(math.exp(w - 1.0) for w in ws)
    elif scheme is PriceScheme.UNIFORM:
        prices = ws
    else:
        raise ValueError(f"unknown price scheme {scheme!r}")
    return PriceAssignment(weights=ws, prices=prices, scheme=scheme)


def _check_prices(instance: BipartiteInstance, pa: PriceAssignment) -> None:
    if len(pa) != instance.n_right:
        raise ValueError(f"price assignment has {len(pa)} entries, expected {instance.n_right}")


def run_market(
    instance: BipartiteInstance, pa: PriceAssignment, sigma: ArrivalOrder
) -> MarketOutcome:
    """Run the sequential market: buyers arrive in sigma order and buy their
    cheapest available neighbor (ties to the lowest item index).

    A buyer purchases whenever any neighbor is available, including at
    utility exactly 0 (possible only at w = 1); this keeps the process
    pointwise identical to RANKING under the induced permutation.
    """
    _check_sigma(instance, sigma)
    _check_prices(instance, pa)
    prices = pa.prices
    assignment = _assign_min_score(instance.adjacency, prices, sigma.order)
    utils = [0.0] * instance.n_left
    revs = [0.0] * instance.n_right
    for b, j in enumerate(assignment):
        if j is not None:
            utils[b] = 1.0 - prices[j]
            revs[j] = prices[j]
    return MarketOutcome(
        matching=Matching(tuple(assignment)),
        utils=tuple(utils),
        revs=tuple(revs),
        purchased=frozenset(j for j in assignment if j is not None),
    )


def permutation_from_prices(pa: PriceAssignment) -> RightPermutation:
    """Priority permutation induced by prices: the cheapest item gets rank 0,
    ties broken by the lowest item index (the same rule run_market uses)."""
    by_price = sorted(range(len(pa)), key=lambda j: (pa.prices[j], j))
    rank = [0] * len(pa)
    for pos, item in enumerate(by_price):
        rank[item] = pos
    return RightPermutation(tuple(rank))


def welfare_decomposition(outcome: MarketOutcome) -> tuple[float, float, int]:
    """Totals (sum of utilities, total revenue, matching size).

    For every outcome the first two sum to the third: each sold item
    contributes (1 - p) + p = 1.
    """
    return (
        math.fsum(outcome.utils),
        math.fsum(outcome.revs),
        outcome.matching.size,
    )
