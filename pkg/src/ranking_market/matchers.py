"""Matching algorithms: online (RANKING, greedy, random greedy), the offline
maximum-matching solver, and exact brute-force oracles for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instance import ArrivalOrder, BipartiteInstance, RightPermutation

_INF = float("inf")


@dataclass(frozen=True)
class Matching:
    """Partial injective assignment of left to right vertices.

    assignment[i] is the right vertex matched to left vertex i, or None.
    """

    assignment: tuple[int | None, ...]

    @property
    def size(self) -> int:
        return sum(1 for j in self.assignment if j is not None)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j in enumerate(self.assignment) if j is not None)


def validate_matching(matching: Matching, instance: BipartiteInstance) -> None:
    """Raise ValueError unless the matching is injective and feasible for the
    given instance."""
    if len(matching.assignment) != instance.n_left:
        raise ValueError("matching size does not match the instance's left side")
    seen: set[int] = set()
    for i, j in enumerate(matching.assignment):
        if j is None:
            continue
        if j in seen:
            raise ValueError(f"right vertex {j} is matched twice")
        seen.add(j)
        if j not in instance.adjacency[i]:
            raise ValueError(f"pair ({i}, {j}) is not an edge of the instance")


def _assign_min_score(adjacency, score, order) -> list[int | None]:
    """Sequentially assign each arriving left vertex to its available
    neighbor with the minimum score, ties going to the lowest index.

    This single loop realizes both RANKING (score = rank values) and the
    price market (score = prices); adjacency lists are sorted ascending, so
    the strict '<' comparison implements the lowest-index tie-break.
    """
    n_right = len(score)
    available = [True] * n_right
    assignment: list[int | None] = [None] * len(adjacency)
    for b in order:
        best_j = -1
        best_s = _INF
        for j in adjacency[b]:
            if available[j] and score[j] < best_s:
                best_s = score[j]
                best_j = j
        if best_j >= 0:
            available[best_j] = False
            assignment[b] = best_j
    return assignment


def _check_sigma(instance: BipartiteInstance, sigma: ArrivalOrder) -> None:
    if len(sigma) != instance.n_left:
        raise ValueError(f"arrival order has {len(sigma)} entries, expected {instance.n_left}")


def ranking(
    instance: BipartiteInstance, pi: RightPermutation, sigma: ArrivalOrder
) -> Matching:
    """RANKING: process arrivals in sigma order, matching each left vertex to
    its unmatched neighbor with the best (lowest) rank under pi."""
    _check_sigma(instance, sigma)
    if len(pi) != instance.n_right:
        raise ValueError(f"permutation has {len(pi)} entries, expected {instance.n_right}")
    return Matching(tuple(_assign_min_score(instance.adjacency, pi.rank, sigma.order)))


def greedy(instance: BipartiteInstance, sigma: ArrivalOrder) -> Matching:
    """Deterministic greedy: each arrival takes its lowest-index unmatched
    neighbor. The output is always a maximal matching."""
    _check_sigma(instance, sigma)
    available = [True] * instance.n_right
    assignment: list[int | None] = [None] * instance.n_left
    for b in sigma.order:
        for j in instance.adjacency[b]:
            if available[j]:
                available[j] = False
                assignment[b] = j
                break
    return Matching(tuple(assignment))


def random_greedy(instance: BipartiteInstance, sigma: ArrivalOrder, seed) -> Matching:
    """Greedy with each arrival choosing uniformly at random among its
    currently unmatched neighbors. Deterministic given the seed."""
    _check_sigma(instance, sigma)
    rng = np.random.default_rng(seed)
    available = [True] * instance.n_right
    assignment: list[int | None] = [None] * instance.n_left
    for b in sigma.order:
        open_neighbors = [j for j in instance.adjacency[b] if available[j]]
        if open_neighbors:
            j = open_neighbors[int(rng.integers(len(open_neighbors)))]
            available[j] = False
            assignment[b] = j
    return Matching(tuple(assignment))


def maximum_matching(instance: BipartiteInstance) -> Matching:
    """Offline maximum matching via augmenting paths (Kuhn's algorithm).

    Only the cardinality is contractual; when several maximum matchings
    exist, which one is returned is an implementation detail.
    """
    match_right = [-1] * instance.n_right
    match_left: list[int | None] = [None] * instance.n_left
    adjacency = instance.adjacency

    def augment(u: int, visited: list[bool]) -> bool:
        for v in adjacency[u]:
            if not visited[v]:
                visited[v] = True
                if match_right[v] == -1 or augment(match_right[v], visited):
                    match_right[v] = u
                    match_left[u] = v
                    return True
        return False

    for u in range(instance.n_left):
        if adjacency[u]:
            augment(u, [False] * instance.n_right)
    return Matching(tuple(match_left))


def brute_force_max_size(instance: BipartiteInstance) -> int:
    """Exact maximum matching size by exhaustive search over assignments.

    Independent of maximum_matching by construction; guarded to n_left <= 10.
    """
    if instance.n_left > 10:
        raise ValueError("brute force oracle is limited to n_left <= 10")
    adjacency = instance.adjacency
    n = instance.n_left
    best = 0

    def explore(i: int, used: int, matched: int) -> None:
        nonlocal best
        if matched + (n - i) <= best:
            return
        if i == n:
            best = matched
            return
        for j in adjacency[i]:
            if not used >> j & 1:
                explore(i + 1, used | 1 << j, matched + 1)
        explore(i + 1, used, matched)

    explore(0, 0, 0)
    return best


def exact_ranking_expectation(instance: BipartiteInstance, sigma: ArrivalOrder) -> Fraction:
    """Exact expected RANKING matching size over all n_right! permutations,
    as a rational number. Oracle for the Monte Carlo estimators; guarded to
    n_right <= 8."""
    _check_sigma(instance, sigma)
    if instance.n_right > 8:
        raise ValueError("exact enumeration is limited to n_right <= 8")
    n_right = instance.n_right
    adjacency = instance.adjacency
    order = sigma.order
    rank = [0] * n_right
    total = 0
    for perm in itertools.permutations(range(n_right)):
        for pos, item in enumerate(perm):
            rank[item] = pos
        assignment = _assign_min_score(adjacency, rank, order)
        total += instance.n_left - assignment.count(None)
    return Fraction(total, math.factorial(n_right))
