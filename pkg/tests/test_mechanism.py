import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import e1
from oracles import brute_force_dominator, gale_shapley
from pareto_match.generate import gen, random_college, random_instance
from pareto_match.mechanism import (
    CollegeInstance,
    Matching,
    PriorityAssignment,
    assign_priorities,
    build_iuap,
    college_from_dict,
    college_to_dict,
    dummy_item,
    expand_college,
    matching_from_dict,
    matching_to_dict,
    solve,
    solve_college,
)
from pareto_match.model import UNMATCHED, Instance, MalformedDocument, UnknownAgent
from pareto_match.verifier import ir_violations, strongly_blocking_pairs

seeds = st.integers(0, 2**32 - 1)


def test_priorities_by_position():
    assert assign_priorities(e1()).pi == (2, 1)
    assert assign_priorities(Instance.from_tiers([[]], [])).pi == (1,)
    swapped = Instance(e1().men[::-1], e1().women)
    assert assign_priorities(swapped) == assign_priorities(e1())


def test_priority_assignment_must_be_permutation():
    with pytest.raises(ValueError):
        PriorityAssignment((1, 1))
    with pytest.raises(ValueError):
        PriorityAssignment((0, 1))


def test_e1_bids():
    layout = build_iuap(e1())
    bids = [[b.bid for b in mb.bidders] for mb in layout.iuap.multibidders]
    assert bids == [
        [{0: 2, 1: 2}, {dummy_item(0): 0}],
        [{0: 2}, {1: 1}, {dummy_item(1): 0}],
    ]
    assert [mb.priority for mb in layout.iuap.multibidders] == [2, 1]


def test_man_with_only_unmatched():
    layout = build_iuap(Instance.from_tiers([[]], [[[0]]]))
    (mb,) = layout.iuap.multibidders
    assert [b.bid for b in mb.bidders] == [{dummy_item(0): 0}]


def test_unacceptable_tiers_do_not_bid():
    layout = build_iuap(Instance.from_tiers([[[0], [UNMATCHED], [1]]], [[[0]], [[0]]]))
    assert len(layout.iuap.multibidders[0].bidders) == 2


@given(seeds)
def test_bid_signs(seed):
    inst = random_instance(random.Random(seed), 5, 5)
    layout = build_iuap(inst)
    for b in layout.iuap.all_bidders():
        man = layout.owner[b.id][0]
        for item, w in b.bid.items():
            if isinstance(item, tuple):
                assert w == 0
            else:
                # negative exactly when the woman finds the man unacceptable
                assert (w < 0) == inst.women[item].prefers(UNMATCHED, man)


def test_solve_e1():
    assert solve(e1()).assignment == (1, 0)


def test_everyone_unacceptable():
    inst = Instance.from_tiers([[], []], [[], []])
    assert solve(inst) == Matching.empty(2)


def test_explicit_priorities_matter():
    # Both men want only w1, w1 is indifferent: the higher-priority man gets her.
    inst = Instance.from_tiers([[[0]], [[0]]], [[[0, 1]]])
    assert solve(inst).assignment == (0, UNMATCHED)
    assert solve(inst, PriorityAssignment((1, 2))).assignment == (UNMATCHED, 0)


def test_matching_rejects_shared_woman():
    with pytest.raises(ValueError):
        Matching((0, 0))


@given(seeds)
def test_strict_preferences_match_gale_shapley(seed):
    rng = random.Random(seed)
    inst = gen(seed, rng.randint(0, 6), rng.randint(0, 6), 0.0, rng.random() * 0.5)
    assert solve(inst) == gale_shapley(inst)


@given(seeds)
def test_output_is_pareto_stable(seed):
    inst = random_instance(random.Random(seed), 4, 4)
    mu = solve(inst)
    assert ir_violations(inst, mu) == []
    assert strongly_blocking_pairs(inst, mu) == []
    assert brute_force_dominator(inst, mu) is None


@given(seeds)
def test_solve_is_deterministic(seed):
    inst = random_instance(random.Random(seed), 6, 6)
    mu = solve(inst)
    assert solve(inst) == mu
    # Another reveal order may pick another greedy MWM, but every man lands in the same tier.
    other = solve(inst, policy="reverse")
    assert [p.tier_of(mu[i]) for i, p in enumerate(inst.men)] == [p.tier_of(other[i]) for i, p in enumerate(inst.men)]


@given(seeds)
def test_matching_round_trip(seed):
    inst = random_instance(random.Random(seed), 5, 5)
    mu = solve(inst)
    assert matching_from_dict(inst, matching_to_dict(inst, mu)) == mu


def test_matching_document_errors():
    with pytest.raises(UnknownAgent):
        matching_from_dict(e1(), {"m9": "w1"})
    with pytest.raises(UnknownAgent):
        matching_from_dict(e1(), {"m1": "w9"})
    with pytest.raises(MalformedDocument):
        matching_from_dict(e1(), {"m1": "w1", "m2": "w1"})
    assert matching_from_dict(e1(), {"m2": "w2"}).assignment == (UNMATCHED, 1)


def test_expand_college_slots():
    ci = CollegeInstance.from_tiers([[[0]], [[0]]], [[[0], [1]]], [2])
    inst, slot_map = expand_college(ci)
    assert slot_map == (0, 0)
    assert inst.women[0] == inst.women[1] == ci.colleges[0]
    assert inst.men[0].tiers[0] == frozenset({0, 1})
    assert inst.woman_names == ("c1#1", "c1#2")


def test_expand_ties_across_colleges():
    ci = CollegeInstance.from_tiers([[[0, 1]]], [[[0]], [[0]]], [2, 1])
    inst, _ = expand_college(ci)
    assert inst.men[0].tiers[0] == frozenset({0, 1, 2})


def test_unit_capacities_are_marriage():
    ci = CollegeInstance.from_tiers([[[0, 1]], [[0], [1]]], [[[0, 1]], [[0], [1]]], [1, 1])
    inst, slot_map = expand_college(ci)
    assert slot_map == (0, 1) and inst == e1()
    assert solve_college(ci).assignment == solve(e1()).assignment


def test_college_examples():
    both = CollegeInstance.from_tiers([[[0]], [[0]]], [[[0, 1]]], [2])
    assert solve_college(both).admitted(0) == {0, 1}
    picky = CollegeInstance.from_tiers([[], [[0]]], [[[0, 1]]], [2])
    assert solve_college(picky).assignment == (UNMATCHED, 0)


def test_college_capacity_validation():
    with pytest.raises(ValueError):
        CollegeInstance.from_tiers([[[0]]], [[[0]]], [0])
    with pytest.raises(ValueError):
        CollegeInstance.from_tiers([[[0]]], [[[0]]], [])


@given(seeds)
def test_college_round_trip_and_capacities(seed):
    ci = random_college(random.Random(seed))
    again = college_from_dict(college_to_dict(ci))
    assert again == ci
    assert solve_college(ci).respects(ci.capacities)


def test_college_document_errors():
    with pytest.raises(MalformedDocument):
        college_from_dict({"students": {}, "colleges": {"c1": {"capacity": 0, "preferences": []}}})
    with pytest.raises(MalformedDocument):
        college_from_dict({"students": {}})
