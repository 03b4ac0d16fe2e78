"""Shared oracle-style verifiers used across the test modules."""

from __future__ import annotations

import numpy as np

from ranking_market import (
    ArrivalOrder,
    BipartiteInstance,
    MarketOutcome,
    PriceAssignment,
    make_instance,
    validate_matching,
)


def random_instance(rng: np.random.Generator, max_side: int = 10) -> BipartiteInstance:
    """Random instance with at least one edge and sides in [1, max_side]."""
    while True:
        n_left = int(rng.integers(1, max_side + 1))
        n_right = int(rng.integers(1, max_side + 1))
        prob = float(rng.uniform(0.1, 0.95))
        coins = rng.random((n_left, n_right)) < prob
        edges = [(i, j) for i in range(n_left) for j in range(n_right) if coins[i, j]]
        if edges:
            return make_instance(n_left, n_right, edges)


def replay_market(
    instance: BipartiteInstance,
    pa: PriceAssignment,
    sigma: ArrivalOrder,
    outcome: MarketOutcome,
) -> None:
    """Re-simulate availability step by step and assert the outcome is what a
    rational buyer sequence produces: every purchase is the cheapest available
    neighbor (ties to the lowest index) at non-negative utility, buyers only
    walk away when nothing is available, and the accounting is consistent."""
    validate_matching(outcome.matching, instance)
    prices = pa.prices
    available = set(range(instance.n_right))
    for b in sigma.order:
        j = outcome.matching.assignment[b]
        open_neighbors = [k for k in instance.adjacency[b] if k in available]
        if j is None:
            assert not open_neighbors, f"buyer {b} walked away from {open_neighbors}"
            assert outcome.utils[b] == 0.0
        else:
            assert j in open_neighbors
            cheapest = min(open_neighbors, key=lambda k: (prices[k], k))
            assert j == cheapest, f"buyer {b} took {j}, cheapest available was {cheapest}"
            assert outcome.utils[b] == 1.0 - prices[j]
            assert outcome.utils[b] >= 0.0
            assert outcome.revs[j] == prices[j]
            available.remove(j)
    sold = {j for j in outcome.matching.assignment if j is not None}
    assert outcome.purchased == sold
    for j in range(instance.n_right):
        if j not in sold:
            assert outcome.revs[j] == 0.0
