import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import e1
from pareto_match.assignment import Bidder, all_greedy_mwms, greedy_mwm, matching_key
from pareto_match.generate import random_instance
from pareto_match.mechanism import build_iuap, dummy_item
from pareto_match.reveal import (
    Configuration,
    Iuap,
    Multibidder,
    NotReady,
    random_policy,
    revealed_ids,
    run_reveals,
    to_uap,
)

seeds = st.integers(0, 2**32 - 1)


def random_iuap(rng: random.Random) -> Iuap:
    items = list(range(rng.randint(0, 4)))
    n = rng.randint(0, 4)
    prios = rng.sample(range(1, 9), n)
    multibidders, next_id = [], 0
    for p in prios:
        bidders = []
        for _ in range(rng.randint(1, 3)):
            bid = {v: rng.randint(0, 3) for v in items if rng.random() < 0.5}
            bidders.append(Bidder(next_id, bid, p))
            next_id += 1
        multibidders.append(Multibidder(tuple(bidders), p))
    return Iuap(tuple(multibidders), frozenset(items))


def e1_iuap() -> Iuap:
    return build_iuap(e1()).iuap


def test_initial_ready_set():
    conf = Configuration(e1_iuap())
    assert [b.id for b in conf.ready_set()] == [0, 2]


def test_e1_first_reveal_takes_lowest_item():
    conf = Configuration(e1_iuap())
    conf.reveal(e1_iuap().multibidders[0].bidders[0])
    assert conf.engine.mate_of_bidder == {0: 0}


def test_e1_both_first_tiers_matched():
    source = e1_iuap()
    conf = Configuration(source)
    conf.reveal(source.multibidders[0].bidders[0])
    conf.reveal(source.multibidders[1].bidders[0])
    assert conf.ready_set() == []
    assert revealed_ids(run_reveals(source)) == {0, 2}
    assert {b.id for b in to_uap(source).bidders} == {0, 2}


def test_reveal_not_ready():
    source = e1_iuap()
    conf = Configuration(source)
    with pytest.raises(NotReady):
        conf.reveal(source.multibidders[0].bidders[1])
    conf.reveal(source.multibidders[0].bidders[0])
    with pytest.raises(NotReady):
        conf.reveal(source.multibidders[0].bidders[1])


def test_dummy_only_multibidder():
    source = Iuap((Multibidder((Bidder(0, {dummy_item(0): 0}, 1),), 1),), frozenset({dummy_item(0)}))
    conf = run_reveals(source)
    assert conf.engine.mate_of_bidder == {0: dummy_item(0)}
    assert conf.ready_set() == []


def test_exhausted_multibidder_never_ready():
    source = Iuap((Multibidder((Bidder(0, {}, 1),), 1),), frozenset())
    conf = run_reveals(source)
    assert revealed_ids(conf) == {0} and not conf.is_ready(0)


def test_policies_agree_on_e1():
    ids = {revealed_ids(run_reveals(e1_iuap(), p)) for p in ("fifo", "reverse", random_policy(7))}
    assert len(ids) == 1


def test_tail_predicate():
    assert Configuration(e1_iuap()).tail_holds()
    b0, b1 = Bidder(0, {0: 1}, 1), Bidder(1, {1: 1}, 1)
    conf = Configuration(Iuap((Multibidder((b0, b1), 1),), frozenset({0, 1})))
    conf.reveal(b0)
    assert conf.tail_holds()
    # Force the second bidder in although the first is still matched.
    conf.engine.add(b1)
    conf.reveal_count[0] += 1
    assert conf.prefix_holds() and not conf.tail_holds()


def test_invalid_iuaps():
    with pytest.raises(ValueError):
        Multibidder((Bidder(0, {}, 1), Bidder(1, {}, 2)), 1)
    with pytest.raises(ValueError):
        Iuap((Multibidder((Bidder(0, {}, 1),), 1), Multibidder((Bidder(1, {}, 1),), 1)), frozenset())
    with pytest.raises(ValueError):
        Iuap((Multibidder((Bidder(0, {}, 1),), 1), Multibidder((Bidder(0, {}, 2),), 2)), frozenset())


def _invariants(conf: Configuration) -> None:
    assert conf.prefix_holds()
    assert conf.tail_holds()
    for mb in conf.source.multibidders:
        assert conf.greedy_count(mb.priority) <= 1


@given(seeds)
def test_invariants_along_random_orders(seed):
    rng = random.Random(seed)
    source = random_iuap(rng)
    conf = run_reveals(source, random_policy(seed), check=_invariants)
    assert conf.ready_set() == []
    assert sum(conf.reveal_count) <= len(source.all_bidders())
    uap = conf.revealed
    assert conf.matching.edges in all_greedy_mwms(uap, limit=20)


@given(seeds)
def test_confluence(seed):
    rng = random.Random(seed)
    source = random_iuap(rng) if seed % 2 else build_iuap(random_instance(rng, 4, 4)).iuap
    expected = revealed_ids(run_reveals(source))
    assert revealed_ids(run_reveals(source, "reverse")) == expected
    for k in range(10):
        assert revealed_ids(run_reveals(source, random_policy(seed + k))) == expected


@given(seeds)
def test_incremental_matches_scratch_on_final_uap(seed):
    source = build_iuap(random_instance(random.Random(seed), 5, 5)).iuap
    conf = run_reveals(source)
    uap = conf.revealed
    assert matching_key(uap, conf.matching.edges) == matching_key(uap, greedy_mwm(uap).edges)


def test_trace_records():
    events = []
    run_reveals(e1_iuap(), trace=events.append)
    assert [e["bidder"] for e in events] == [0, 2]
    assert events[1]["path_length"] == 2 and events[1]["displaced"] is None
