import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_uap
from oracles import matroid_greedy, mwm_family
from pareto_match.assignment import (
    AuctionEngine,
    Bidder,
    Scalarization,
    SizeLimit,
    Uap,
    add_bidder,
    all_greedy_mwms,
    all_matchings,
    check_certificate,
    greedy_count,
    greedy_mwm,
    independent_sets,
    matching_key,
    priority_multiset,
    scalarize,
)

seeds = st.integers(0, 2**32 - 1)


def e1_first_tiers() -> Uap:
    return Uap.of([Bidder(0, {0: 2, 1: 2}, 2), Bidder(2, {0: 2}, 1)], [0, 1])


def test_scalarization_constants():
    uap = Uap.of([Bidder(0, {0: 5}, 1), Bidder(1, {0: 3}, 2)], [0])
    scale = Scalarization.covering(uap.bidders)
    assert (scale.c2, scale.c1) == (4, 13)
    assert scalarize(uap) == {(0, 0): 5 * 13 + 4 + 1, (1, 0): 3 * 13 + 4 + 2}


def test_scalarize_empty():
    assert scalarize(Uap.of([], [])) == {}


def test_zero_bid_still_positive():
    uap = Uap.of([Bidder(0, {0: 0}, 1)], [0])
    scale = Scalarization.covering(uap.bidders)
    assert scalarize(uap)[(0, 0)] == scale.c2 + 1 > 0


def test_higher_priority_wins_tie():
    uap = Uap.of([Bidder(1, {"v1": 5}, 1), Bidder(2, {"v1": 5}, 2)], ["v1"])
    assert greedy_mwm(uap).edges == {(2, "v1")}


def test_e1_first_tiers():
    m = greedy_mwm(e1_first_tiers())
    assert m.edges == {(0, 1), (2, 0)}
    assert matching_key(e1_first_tiers(), m.edges)[:2] == (4, 2)
    assert greedy_count(e1_first_tiers(), 2) == 1


def test_empty():
    assert greedy_mwm(Uap.of([], [])).edges == frozenset()
    assert greedy_count(Uap.of([], []), 3) == 0
    assert all_greedy_mwms(Uap.of([], [])) == {frozenset()}


def test_add_losing_bidder():
    uap = Uap.of([Bidder(0, {0: 5}, 2)], [0])
    m = greedy_mwm(uap, Scalarization.covering(uap.bidders + (Bidder(1, {0: 1}, 1),)))
    grown, m2 = add_bidder(uap, m, Bidder(1, {0: 1}, 1))
    assert m2.edges == m.edges == {(0, 0)}
    assert check_certificate(grown, m2) == []


def test_add_displaces_lower_priority():
    u1, u2 = Bidder(1, {"v1": 5}, 1), Bidder(2, {"v1": 5}, 2)
    uap = Uap.of([u1], ["v1"])
    m = greedy_mwm(uap, Scalarization.covering([u1, u2]))
    grown, m2 = add_bidder(uap, m, u2)
    assert m2.edges == {(2, "v1")} == greedy_mwm(grown).edges


def test_add_to_fresh_item():
    uap = Uap.of([Bidder(0, {0: 1}, 1)], [0, 1])
    _, m = add_bidder(uap, greedy_mwm(uap), Bidder(1, {1: 0}, 2))
    assert (1, 1) in m.edges


def test_add_duplicate_id():
    uap = Uap.of([Bidder(0, {0: 1}, 1)], [0])
    with pytest.raises(ValueError):
        add_bidder(uap, greedy_mwm(uap), Bidder(0, {0: 1}, 1))


def test_engine_refuses_uncovered_bidder():
    eng = AuctionEngine([0], Scalarization.covering([Bidder(0, {0: 1}, 1)]))
    eng.add(Bidder(0, {0: 1}, 1))
    with pytest.raises(ValueError):
        eng.add(Bidder(1, {0: 1}, 5))


def test_one_greedy_mwm_for_priority_tie():
    uap = Uap.of([Bidder(1, {0: 5}, 1), Bidder(2, {0: 5}, 2)], [0])
    assert all_greedy_mwms(uap) == {frozenset({(2, 0)})}


def test_symmetric_items():
    uap = Uap.of([Bidder(0, {0: 3, 1: 3}, 1)], [0, 1])
    found = all_greedy_mwms(uap)
    assert found == {frozenset({(0, 0)}), frozenset({(0, 1)})}
    assert len({tuple(sorted(priority_multiset(uap, m).items())) for m in found}) == 1


def test_size_limit():
    uap = Uap.of([Bidder(k, {}, 1) for k in range(7)], range(6))
    with pytest.raises(SizeLimit):
        all_greedy_mwms(uap)


def test_invalid_bidders():
    with pytest.raises(ValueError):
        Bidder(0, {0: 1}, 0)
    with pytest.raises(ValueError):
        Uap.of([Bidder(0, {9: 1}, 1)], [0])
    with pytest.raises(ValueError):
        Uap.of([Bidder(0, {}, 1), Bidder(0, {}, 1)], [])


@given(seeds)
def test_scalarized_order_is_lexicographic(seed):
    uap = random_uap(random.Random(seed), 8)
    w = scalarize(uap)
    scored = [(matching_key(uap, m), sum(w[e] for e in m)) for m in all_matchings(uap)]
    for k1, s1 in scored:
        for k2, s2 in scored:
            if k1 > k2:
                assert s1 > s2


@given(seeds)
def test_greedy_is_among_enumerated(seed):
    uap = random_uap(random.Random(seed))
    m = greedy_mwm(uap)
    found = all_greedy_mwms(uap)
    assert m.edges in found
    assert len({tuple(sorted(priority_multiset(uap, e).items())) for e in found}) == 1
    assert check_certificate(uap, m) == []


@given(seeds)
def test_incremental_matches_from_scratch(seed):
    rng = random.Random(seed)
    full = random_uap(rng)
    order = list(full.bidders)
    rng.shuffle(order)
    uap, m = Uap.of([], full.items), None
    scale = Scalarization.covering(full.bidders)
    m = greedy_mwm(uap, scale)
    for b in order:
        uap, m = add_bidder(uap, m, b)
        assert check_certificate(uap, m) == []
        scratch = greedy_mwm(uap)
        assert matching_key(uap, m.edges) == matching_key(uap, scratch.edges)
        assert priority_multiset(uap, m.edges) == priority_multiset(uap, scratch.edges)


@given(seeds)
def test_matroid_family_and_greedy(seed):
    uap = random_uap(random.Random(seed), 12, max_bidders=10)
    family = independent_sets(uap)
    assert family == mwm_family(uap)
    for s in family:
        for x in s:
            assert s - {x} in family
    for s1 in family:
        for s2 in family:
            if len(s1) > len(s2):
                assert any(s2 | {x} in family for x in s1 - s2)
    chosen = matroid_greedy(uap)
    matched = greedy_mwm(uap).matched_bidders()
    prio = {b.id: b.priority for b in uap.bidders}
    assert sorted(prio[x] for x in chosen) == sorted(prio[x] for x in matched)
