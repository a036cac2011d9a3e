import random

import pytest
from hypothesis import HealthCheck, settings

from pareto_match.assignment import Bidder, Uap
from pareto_match.model import Instance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def e1() -> Instance:
    # m1: w1 ~ w2; m2: w1 > w2; w1: m1 ~ m2; w2: m1 > m2
    return Instance.from_tiers([[[0, 1]], [[0], [1]]], [[[0, 1]], [[0], [1]]])


@pytest.fixture
def inst_e1() -> Instance:
    return e1()


def random_uap(rng: random.Random, max_vertices: int = 12, max_bidders: int | None = None) -> Uap:
    """Random UAP with at most ``max_vertices`` bidders plus items, small weights and repeated priorities."""
    total = rng.randint(0, max_vertices)
    n_bidders = rng.randint(0, total)
    if max_bidders is not None:
        n_bidders = min(n_bidders, max_bidders)
    items = list(range(total - n_bidders))
    bidders = []
    for k in range(n_bidders):
        chosen = [v for v in items if rng.random() < 0.5]
        bidders.append(Bidder(k, {v: rng.randint(-1, 3) for v in chosen}, rng.randint(1, 4)))
    return Uap.of(bidders, items)
