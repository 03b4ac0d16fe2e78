"""Experiments over the market process: the per-edge utility+revenue
guarantee, its two supporting pathwise properties, competitive-ratio
estimation, and the uniform-price failure report on the triangular hard
instance.

Seeding contract: trial t of any estimator draws all of its randomness from
``trial_rng(seed, t)``, a deterministic function of (master seed, trial
index). Trials are therefore independent of execution order, and every
estimator returns bit-identical results for any ``jobs`` setting.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from statistics import NormalDist
from typing import Literal, NamedTuple

import numpy as np

from .instance import (
    ArrivalOrder,
    BipartiteInstance,
    kvv_hard_instance,
    random_bipartite,
    without_right_vertex,
)
from .matchers import _assign_min_score, greedy, maximum_matching, random_greedy
from .market import PriceAssignment, PriceScheme, prices_from_weights, run_market

GUARANTEE = 1.0 - 1.0 / math.e

Algorithm = Literal["ranking-market", "random-greedy", "greedy"]

_IDENTITY_TOL = 1e-9

# Trials are accumulated in fixed-size blocks and block partials are combined
# in block order, so parallel and sequential execution produce identical
# floating-point results.
_CHUNK_TRIALS = 2048

# Auxiliary streams (instance generation, arrival orders) live far above any
# realistic trial index so they never collide with trial_rng streams.
_AUX_BASE = 1 << 62


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """The per-trial random stream: a deterministic function of (seed, trial)."""
    return np.random.default_rng((seed, trial))


def aux_rng(seed: int, tag: int) -> np.random.Generator:
    """Streams for one-off draws (instances, arrival orders) under the same
    master seed, disjoint from every trial stream."""
    return np.random.default_rng((seed, _AUX_BASE + tag))


def _z(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return NormalDist().inv_cdf((1.0 + level) / 2.0)


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo mean with a normal-approximation confidence half-width."""

    mean: float
    half_width: float
    trials: int
    seed: int
    level: float = 0.999

    @property
    def stderr(self) -> float:
        return self.half_width / _z(self.level)


def _finish(total: float, total_sq: float, trials: int, seed: int, level: float) -> EstimateWithCI:
    mean = total / trials
    if trials > 1:
        # clamp: total_sq - total^2/trials can go epsilon-negative when the
        # summands are all identical
        var = max(0.0, (total_sq - total * total / trials) / (trials - 1))
        half_width = _z(level) * math.sqrt(var / trials)
    else:
        half_width = 0.0
    return EstimateWithCI(
        mean=mean, half_width=half_width, trials=trials, seed=seed, level=level
    )


def _run_chunks(worker, trials: int, jobs: int) -> list:
    spans = [(t0, min(t0 + _CHUNK_TRIALS, trials)) for t0 in range(0, trials, _CHUNK_TRIALS)]
    if jobs <= 1 or len(spans) <= 1:
        return [worker(t0, t1) for t0, t1 in spans]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, *zip(*spans)))


# ---------------------------------------------------------------------------
# Counterfactual item removal and the two pathwise properties
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterfactualResult:
    """What buyer i would pay with item j removed, next to what actually
    happened to (i, j) in the full market.

    counterfactual_price is 1 when the buyer buys nothing in the reduced
    market; counterfactual_weight is the weight of the fallback item under
    the exponential scheme (1 when there is none, None under uniform prices).
    """

    counterfactual_price: float
    counterfactual_weight: float | None
    item_sold: bool
    buyer_utility: float


class PropertyCheck(NamedTuple):
    sold_if_cheaper: bool
    utility_floor: bool


def _require_edge(instance: BipartiteInstance, buyer: int, item: int) -> None:
    if not 0 <= buyer < instance.n_left or item not in instance.adjacency[buyer]:
        raise ValueError(f"({buyer}, {item}) is not an edge of the instance")


def counterfactual(
    instance: BipartiteInstance,
    pa: PriceAssignment,
    sigma: ArrivalOrder,
    buyer: int,
    item: int,
) -> CounterfactualResult:
    """Run the market without `item` (same prices, same arrival order) and
    record the price of the item `buyer` falls back to, alongside the full
    market's outcome for the (buyer, item) edge."""
    _require_edge(instance, buyer, item)
    reduced = run_market(without_right_vertex(instance, item), pa, sigma)
    fallback = reduced.matching.assignment[buyer]
    if fallback is None:
        price, weight = 1.0, 1.0
    else:
        price, weight = pa.prices[fallback], pa.weights[fallback]
    full = run_market(instance, pa, sigma)
    return CounterfactualResult(
        counterfactual_price=price,
        counterfactual_weight=weight if pa.scheme is PriceScheme.EXPONENTIAL else None,
        item_sold=item in full.purchased,
        buyer_utility=full.utils[buyer],
    )


def check_counterfactual_properties(
    instance: BipartiteInstance,
    pa: PriceAssignment,
    sigma: ArrivalOrder,
    buyer: int,
    item: int,
) -> PropertyCheck:
    """The two pathwise facts behind the per-edge guarantee:

    sold_if_cheaper: the item always sells when its price is below the
    buyer's counterfactual price. utility_floor: the buyer's utility in the
    full market is at least 1 minus the counterfactual price.
    """
    cf = counterfactual(instance, pa, sigma, buyer, item)
    return PropertyCheck(
        sold_if_cheaper=pa.prices[item] >= cf.counterfactual_price or cf.item_sold,
        utility_floor=cf.buyer_utility >= 1.0 - cf.counterfactual_price - _IDENTITY_TOL,
    )


def check_monotone_availability(
    instance: BipartiteInstance,
    pa: PriceAssignment,
    sigma: ArrivalOrder,
    item: int,
) -> bool:
    """Lockstep the full market against the market without `item` and verify
    that at every arrival the full market's available set contains the
    reduced market's and exceeds it by at most one item."""
    if not 0 <= item < instance.n_right:
        raise ValueError(f"right vertex {item} out of range")
    if len(pa) != instance.n_right or len(sigma) != instance.n_left:
        raise ValueError("price assignment or arrival order sized wrongly")
    prices = pa.prices
    n_right = instance.n_right
    avail_full = [True] * n_right
    avail_reduced = [True] * n_right
    avail_reduced[item] = False

    def nested_with_one_extra() -> bool:
        extra = 0
        for k in range(n_right):
            if avail_reduced[k] and not avail_full[k]:
                return False
            if avail_full[k] and not avail_reduced[k]:
                extra += 1
        return extra <= 1

    for b in sigma.order:
        if not nested_with_one_extra():
            return False
        for avail in (avail_full, avail_reduced):
            best_j = -1
            best_p = math.inf
            for j in instance.adjacency[b]:
                if avail[j] and prices[j] < best_p:
                    best_p = prices[j]
                    best_j = j
            if best_j >= 0:
                avail[best_j] = False
    return nested_with_one_extra()


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------


def _coerce_scheme(scheme: PriceScheme | str) -> PriceScheme:
    return scheme if isinstance(scheme, PriceScheme) else PriceScheme(scheme)


def _edge_chunk(
    instance: BipartiteInstance,
    sigma: ArrivalOrder,
    scheme: PriceScheme,
    seed: int,
    buyers: np.ndarray,
    items: np.ndarray,
    track_buyer: int | None,
    track_item: int | None,
    t0: int,
    t1: int,
):
    adjacency = instance.adjacency
    order = sigma.order
    n_left, n_right = instance.n_left, instance.n_right
    exponential = scheme is PriceScheme.EXPONENTIAL
    sum_x = np.zeros(len(buyers))
    sumsq_x = np.zeros(len(buyers))
    served = 0
    priciest = 0
    served_without_priciest = 0
    for t in range(t0, t1):
        w = trial_rng(seed, t).random(n_right)
        prices = np.exp(w - 1.0) if exponential else w
        plist = prices.tolist()
        assignment = _assign_min_score(adjacency, plist, order)
        utils = np.zeros(n_left)
        revs = np.zeros(n_right)
        for b, j in enumerate(assignment):
            if j is not None:
                pj = plist[j]
                utils[b] = 1.0 - pj
                revs[j] = pj
        x = utils[buyers] + revs[items]
        sum_x += x
        sumsq_x += x * x
        if track_buyer is not None:
            got_item = assignment[track_buyer] is not None
            is_priciest = int(np.argmax(w)) == track_item
            served += got_item
            priciest += is_priciest
            served_without_priciest += got_item and not is_priciest
    return sum_x, sumsq_x, served, priciest, served_without_priciest


def _edge_sweep(
    instance: BipartiteInstance,
    scheme: PriceScheme,
    sigma: ArrivalOrder,
    edges: list[tuple[int, int]],
    trials: int,
    seed: int,
    level: float,
    jobs: int,
    track_buyer: int | None = None,
    track_item: int | None = None,
):
    if trials < 1:
        raise ValueError("trials must be >= 1")
    buyers = np.array([e[0] for e in edges], dtype=np.intp)
    items = np.array([e[1] for e in edges], dtype=np.intp)
    worker = partial(
        _edge_chunk, instance, sigma, scheme, seed, buyers, items, track_buyer, track_item
    )
    parts = _run_chunks(worker, trials, jobs)
    sum_x = parts[0][0].copy()
    sumsq_x = parts[0][1].copy()
    served = parts[0][2]
    priciest = parts[0][3]
    bad = parts[0][4]
    for p in parts[1:]:
        sum_x += p[0]
        sumsq_x += p[1]
        served += p[2]
        priciest += p[3]
        bad += p[4]
    estimates = {
        edge: _finish(float(sum_x[k]), float(sumsq_x[k]), trials, seed, level)
        for k, edge in enumerate(edges)
    }
    return estimates, served, priciest, bad


def estimate_edge_guarantee(
    instance: BipartiteInstance,
    buyer: int,
    item: int,
    scheme: PriceScheme | str,
    sigma: ArrivalOrder,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
) -> EstimateWithCI:
    """Monte Carlo estimate of E[util_buyer + rev_item] over fresh weight
    draws per trial, with the arrival order held fixed."""
    _require_edge(instance, buyer, item)
    estimates, _, _, _ = _edge_sweep(
        instance, _coerce_scheme(scheme), sigma, [(buyer, item)], trials, seed, level, jobs
    )
    return estimates[(buyer, item)]


def edge_guarantee_sweep(
    instance: BipartiteInstance,
    scheme: PriceScheme | str,
    sigma: ArrivalOrder,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
    edges: list[tuple[int, int]] | None = None,
) -> dict[tuple[int, int], EstimateWithCI]:
    """Per-edge guarantee estimates for every requested edge (default: all
    edges), sharing one market simulation per trial. Identical to calling
    estimate_edge_guarantee per edge with the same seed."""
    if edges is None:
        edges = list(instance.edges)
    for buyer, item in edges:
        _require_edge(instance, buyer, item)
    if not edges:
        raise ValueError("instance has no edges to sweep")
    estimates, _, _, _ = _edge_sweep(
        instance, _coerce_scheme(scheme), sigma, edges, trials, seed, level, jobs
    )
    return estimates


def _size_chunk(
    instance: BipartiteInstance,
    sigma: ArrivalOrder,
    algorithm: str,
    seed: int,
    t0: int,
    t1: int,
):
    adjacency = instance.adjacency
    order = sigma.order
    n_right = instance.n_right
    sum_s = 0.0
    sumsq_s = 0.0
    for t in range(t0, t1):
        if algorithm == "ranking-market":
            w = trial_rng(seed, t).random(n_right)
            plist = np.exp(w - 1.0).tolist()
            assignment = _assign_min_score(adjacency, plist, order)
            size = len(assignment) - assignment.count(None)
        elif algorithm == "random-greedy":
            size = random_greedy(instance, sigma, trial_rng(seed, t)).size
        elif algorithm == "greedy":
            size = greedy(instance, sigma).size
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        sum_s += size
        sumsq_s += size * size
    return sum_s, sumsq_s


def estimate_matching_size(
    instance: BipartiteInstance,
    algorithm: Algorithm,
    sigma: ArrivalOrder,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
) -> EstimateWithCI:
    """Monte Carlo estimate of the expected matching size, with fresh
    randomness (weights or greedy choices) per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if algorithm not in ("ranking-market", "random-greedy", "greedy"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    worker = partial(_size_chunk, instance, sigma, algorithm, seed)
    parts = _run_chunks(worker, trials, jobs)
    total = 0.0
    total_sq = 0.0
    for s, sq in parts:
        total += s
        total_sq += sq
    return _finish(total, total_sq, trials, seed, level)


def estimate_competitive_ratio(
    instance: BipartiteInstance,
    algorithm: Algorithm,
    sigma: ArrivalOrder,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
) -> EstimateWithCI:
    """Estimate of E[|M|] / |M*|, where |M*| is the offline optimum."""
    optimum = maximum_matching(instance).size
    if optimum == 0:
        raise ValueError("competitive ratio is undefined on an instance with optimum 0")
    sizes = estimate_matching_size(
        instance, algorithm, sigma, trials, seed, level=level, jobs=jobs
    )
    return EstimateWithCI(
        mean=sizes.mean / optimum,
        half_width=sizes.half_width / optimum,
        trials=trials,
        seed=seed,
        level=level,
    )


# ---------------------------------------------------------------------------
# The welfare chain and the uniform-price failure report
# ---------------------------------------------------------------------------


def _welfare_chunk(
    instance: BipartiteInstance,
    sigma: ArrivalOrder,
    seed: int,
    buyers: np.ndarray,
    items: np.ndarray,
    t0: int,
    t1: int,
):
    adjacency = instance.adjacency
    order = sigma.order
    n_left, n_right = instance.n_left, instance.n_right
    sum_m = 0.0
    sumsq_m = 0.0
    sum_e = 0.0
    sumsq_e = 0.0
    violations = 0
    for t in range(t0, t1):
        w = trial_rng(seed, t).random(n_right)
        plist = np.exp(w - 1.0).tolist()
        assignment = _assign_min_score(adjacency, plist, order)
        size = len(assignment) - assignment.count(None)
        utils = np.zeros(n_left)
        revs = np.zeros(n_right)
        for b, j in enumerate(assignment):
            if j is not None:
                pj = plist[j]
                utils[b] = 1.0 - pj
                revs[j] = pj
        edge_sum = float(np.sum(utils[buyers] + revs[items])) if len(buyers) else 0.0
        if size < edge_sum - _IDENTITY_TOL:
            violations += 1
        sum_m += size
        sumsq_m += size * size
        sum_e += edge_sum
        sumsq_e += edge_sum * edge_sum
    return sum_m, sumsq_m, sum_e, sumsq_e, violations


@dataclass(frozen=True)
class WelfareBound:
    """Links of the chain E[|M|] >= sum over M* edges of E[util+rev]
    >= (1 - 1/e) |M*|, estimated from shared trials.

    pointwise_violations counts trials where |M| fell below the per-edge sum
    (never happens: utilities and revenues are non-negative and M* is a
    matching).
    """

    matching_size: EstimateWithCI
    matched_edge_sum: EstimateWithCI
    lower_bound: float
    optimum: int
    pointwise_violations: int


def check_welfare_bound(
    instance: BipartiteInstance,
    sigma: ArrivalOrder,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
) -> WelfareBound:
    """Estimate E[|M|] under exponential prices next to the per-M*-edge sum
    of util+rev and the (1 - 1/e)|M*| lower bound."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    optimum_pairs = maximum_matching(instance).pairs
    buyers = np.array([p[0] for p in optimum_pairs], dtype=np.intp)
    items = np.array([p[1] for p in optimum_pairs], dtype=np.intp)
    worker = partial(_welfare_chunk, instance, sigma, seed, buyers, items)
    parts = _run_chunks(worker, trials, jobs)
    sum_m = sumsq_m = sum_e = sumsq_e = 0.0
    violations = 0
    for pm, pmsq, pe, pesq, v in parts:
        sum_m += pm
        sumsq_m += pmsq
        sum_e += pe
        sumsq_e += pesq
        violations += v
    return WelfareBound(
        matching_size=_finish(sum_m, sumsq_m, trials, seed, level),
        matched_edge_sum=_finish(sum_e, sumsq_e, trials, seed, level),
        lower_bound=GUARANTEE * len(optimum_pairs),
        optimum=len(optimum_pairs),
        pointwise_violations=violations,
    )


@dataclass(frozen=True)
class LastBuyerReport:
    """The triangular hard instance's last buyer, whose single edge is the
    stress case for the per-edge guarantee.

    exponential/uniform estimate E[util + rev] for that edge under each price
    scheme. service_probability is how often the last buyer gets an item at
    all: that requires the full price vector to be sorted ascending, an event
    of probability 1/n!, so it is essentially never at realistic n. The
    tractable necessary condition is that the last item is the priciest;
    priciest_last_probability measures that event, whose probability is
    exactly reference_probability = 1/n. service_without_priciest counts
    trials violating the necessity (always 0).
    """

    n: int
    trials: int
    seed: int
    level: float
    exponential: EstimateWithCI
    uniform: EstimateWithCI
    service_probability: EstimateWithCI
    priciest_last_probability: EstimateWithCI
    service_without_priciest: int
    reference_probability: float


def last_buyer_report(
    n: int,
    trials: int,
    seed: int,
    *,
    level: float = 0.999,
    jobs: int = 1,
) -> LastBuyerReport:
    """Measure the last buyer's edge of the triangular instance under both
    price schemes, plus the service and priciest-last-item probabilities.

    The exponential estimate meets the 1 - 1/e bound; the uniform estimate
    sits near 1/2, which is the whole point of the exponential price curve.
    """
    if n < 2:
        raise ValueError("the report needs n >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    instance = kvv_hard_instance(n)
    sigma = ArrivalOrder.identity(n)
    edge = (n - 1, n - 1)
    exp_estimates, served, priciest, bad = _edge_sweep(
        instance,
        PriceScheme.EXPONENTIAL,
        sigma,
        [edge],
        trials,
        seed,
        level,
        jobs,
        track_buyer=n - 1,
        track_item=n - 1,
    )
    uni_estimates, _, _, _ = _edge_sweep(
        instance, PriceScheme.UNIFORM, sigma, [edge], trials, seed, level, jobs
    )
    # Bernoulli sums: the sum of squares equals the sum
    return LastBuyerReport(
        n=n,
        trials=trials,
        seed=seed,
        level=level,
        exponential=exp_estimates[edge],
        uniform=uni_estimates[edge],
        service_probability=_finish(served, served, trials, seed, level),
        priciest_last_probability=_finish(priciest, priciest, trials, seed, level),
        service_without_priciest=bad,
        reference_probability=1.0 / n,
    )


# ---------------------------------------------------------------------------
# Randomized property sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertySweep:
    trials: int
    seed: int
    sold_if_cheaper_violations: int
    utility_floor_violations: int
    monotone_violations: int

    @property
    def violations(self) -> int:
        return (
            self.sold_if_cheaper_violations
            + self.utility_floor_violations
            + self.monotone_violations
        )

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _property_chunk(
    instance: BipartiteInstance | None,
    max_side: int,
    seed: int,
    t0: int,
    t1: int,
):
    fixed_edges = list(instance.edges) if instance is not None else None
    p1 = p2 = mono = 0
    for t in range(t0, t1):
        rng = trial_rng(seed, t)
        if instance is None:
            while True:
                n_left = int(rng.integers(1, max_side + 1))
                n_right = int(rng.integers(1, max_side + 1))
                inst = random_bipartite(n_left, n_right, float(rng.uniform(0.2, 0.9)), rng)
                if inst.edge_count:
                    break
            edges = list(inst.edges)
        else:
            inst, edges = instance, fixed_edges
        sigma = ArrivalOrder.random(inst.n_left, rng)
        pa = prices_from_weights(rng.random(inst.n_right), PriceScheme.EXPONENTIAL)
        buyer, item = edges[int(rng.integers(len(edges)))]
        check = check_counterfactual_properties(inst, pa, sigma, buyer, item)
        p1 += not check.sold_if_cheaper
        p2 += not check.utility_floor
        mono += not check_monotone_availability(inst, pa, sigma, item)
    return p1, p2, mono


def property_sweep(
    trials: int,
    seed: int,
    *,
    instance: BipartiteInstance | None = None,
    max_side: int = 10,
    jobs: int = 1,
) -> PropertySweep:
    """Check the two counterfactual properties and monotone availability on
    random (instance, weights, arrival order, edge) tuples.

    With a fixed instance, only weights, arrival order, and the edge vary;
    otherwise each trial draws a fresh random instance with sides up to
    max_side. All three are theorems, so any violation is a bug.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if instance is not None and instance.edge_count == 0:
        raise ValueError("property sweep needs an instance with at least one edge")
    worker = partial(_property_chunk, instance, max_side, seed)
    parts = _run_chunks(worker, trials, jobs)
    p1 = sum(p[0] for p in parts)
    p2 = sum(p[1] for p in parts)
    mono = sum(p[2] for p in parts)
    return PropertySweep(
        trials=trials,
        seed=seed,
        sold_if_cheaper_violations=p1,
        utility_floor_violations=p2,
        monotone_violations=mono,
    )
