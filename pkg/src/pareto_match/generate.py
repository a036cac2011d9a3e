"""Seeded instance generators and exhaustive preference enumeration."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Sequence

from .mechanism import CollegeInstance
from .model import UNMATCHED, Instance, PreferenceOrder


def weak_orders(elements: Sequence[int]) -> Iterator[tuple[frozenset[int], ...]]:
    """All ordered set partitions of ``elements`` (13 for three elements, 75 for four)."""
    elements = list(elements)
    if not elements:
        yield ()
        return
    first, rest = elements[0], elements[1:]
    for order in weak_orders(rest):
        # join an existing tier
        for k in range(len(order)):
            yield order[:k] + (order[k] | {first},) + order[k + 1 :]
        # or open a new tier in any gap
        for k in range(len(order) + 1):
            yield order[:k] + (frozenset({first}),) + order[k:]


def preference_orders(n_opposite: int) -> list[PreferenceOrder]:
    """Every weak order over the opposite side plus ``UNMATCHED``, in a fixed order."""
    orders = [PreferenceOrder(t) for t in weak_orders(list(range(n_opposite)) + [UNMATCHED])]
    return sorted(orders, key=lambda p: [sorted(g) for g in p.tiers])


def random_order(rng: random.Random, n_opposite: int, tie_density: float, incompleteness: float) -> PreferenceOrder:
    kept = [x for x in range(n_opposite) if rng.random() >= incompleteness]
    rng.shuffle(kept)
    sequence = kept + [UNMATCHED]
    tiers: list[set[int]] = [{sequence[0]}]
    for x in sequence[1:]:
        if rng.random() < tie_density:
            tiers[-1].add(x)
        else:
            tiers.append({x})
    return PreferenceOrder(tuple(frozenset(t) for t in tiers))


def gen(
    seed: int,
    n_men: int,
    n_women: int,
    tie_density: float = 0.0,
    incompleteness: float = 0.0,
) -> Instance:
    """Reproducible random instance.

    Each agent shuffles the acceptable part of the opposite side, appends the
    unmatched position, and merges each adjacent pair of ranks into one tier
    with probability ``tie_density``.  Each opposite agent is independently
    dropped below the unmatched position with probability ``incompleteness``.
    """
    for name, p in (("tie_density", tie_density), ("incompleteness", incompleteness)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    if n_men < 0 or n_women < 0:
        raise ValueError("agent counts must be nonnegative")
    rng = random.Random(seed)
    men = tuple(random_order(rng, n_women, tie_density, incompleteness) for _ in range(n_men))
    women = tuple(random_order(rng, n_men, tie_density, incompleteness) for _ in range(n_women))
    return Instance(men, women)


def random_instance(rng: random.Random, max_men: int, max_women: int, min_agents: int = 0) -> Instance:
    """Instance with random sizes, tie density, and incompleteness drawn from ``rng``."""
    while True:
        n_men = rng.randint(0, max_men)
        n_women = rng.randint(0, max_women)
        if n_men + n_women >= min_agents:
            break
    return gen(rng.getrandbits(32), n_men, n_women, rng.random(), rng.random() * 0.6)


def exhaustive_corpus(n_men: int, n_women: int) -> Iterator[Instance]:
    """Every preference profile of the given size (28,561 for 2x2)."""
    men_orders = preference_orders(n_women)
    women_orders = preference_orders(n_men)
    for men in itertools.product(men_orders, repeat=n_men):
        for women in itertools.product(women_orders, repeat=n_women):
            yield Instance(men, women)


def random_college(
    rng: random.Random, max_students: int = 4, max_colleges: int = 2, max_capacity: int = 3
) -> CollegeInstance:
    n_s = rng.randint(0, max_students)
    n_c = rng.randint(0, max_colleges)
    ties, drop = rng.random(), rng.random() * 0.6
    students = tuple(random_order(rng, n_c, ties, drop) for _ in range(n_s))
    colleges = tuple(random_order(rng, n_s, ties, drop) for _ in range(n_c))
    capacities = tuple(rng.randint(1, max_capacity) for _ in range(n_c))
    return CollegeInstance(students, colleges, capacities)
