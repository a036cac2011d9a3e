"""Brute-force property checks for marriage and college-admissions matchings."""

from __future__ import annotations

import functools
import itertools
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator

from .assignment import SizeLimit
from .generate import preference_orders, random_order
from .mechanism import CollegeInstance, CollegeMatching, Matching, solve
from .model import UNMATCHED, Instance, PreferenceOrder


class Property(Enum):
    IR = "IR"
    WEAK_STABILITY = "WeakStability"
    PARETO_STABILITY = "ParetoStability"
    STRATEGYPROOFNESS = "Strategyproofness"
    COLLEGE_PARETO_STABILITY = "CollegeParetoStability"


@dataclass
class AuditReport:
    property: Property
    witnesses: list[dict] = field(default_factory=list)
    profiles_checked: int = 0
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {
            "property": self.property.value,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "profiles_checked": self.profiles_checked,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditReport":
        report = cls(Property(doc["property"]), list(doc["witnesses"]), doc.get("profiles_checked", 0), doc.get("seed"))
        if report.passed != doc["passed"]:
            raise ValueError("'passed' disagrees with the witness list")
        return report


@dataclass(frozen=True)
class MisreportProfile:
    coalition: tuple[int, ...]
    reports: dict[int, PreferenceOrder]


class Ranks:
    """Tier indices per agent; ``man[i][UNMATCHED]`` and ``woman[j][UNMATCHED]`` address the last column."""

    def __init__(self, inst: Instance):
        self.man = [_tier_row(p, inst.n_women) for p in inst.men]
        self.woman = [_tier_row(p, inst.n_men) for p in inst.women]


def _tier_row(order: PreferenceOrder, n_opposite: int) -> list[int]:
    where = order.tier_map()
    bottom = len(order.tiers)
    return [where.get(x, bottom) for x in range(n_opposite)] + [where.get(UNMATCHED, bottom)]


@functools.lru_cache(maxsize=4096)
def ranks(inst: Instance) -> Ranks:
    return Ranks(inst)


def ir_violations(inst: Instance, mu: Matching) -> list[tuple[int, int]]:
    """Matched pairs where either side ranks the partner strictly below being unmatched."""
    r = ranks(inst)
    return [
        (i, j)
        for i, j in mu.pairs()
        if r.man[i][j] > r.man[i][UNMATCHED] or r.woman[j][i] > r.woman[j][UNMATCHED]
    ]


def strongly_blocking_pairs(inst: Instance, mu: Matching) -> list[tuple[int, int]]:
    r = ranks(inst)
    husband = mu.wife_to_husband(inst.n_women)
    return [
        (i, j)
        for i in range(inst.n_men)
        for j in range(inst.n_women)
        if r.man[i][j] < r.man[i][mu[i]] and r.woman[j][i] < r.woman[j][husband[j]]
    ]


def is_weakly_stable(inst: Instance, mu: Matching) -> bool:
    return not ir_violations(inst, mu) and not strongly_blocking_pairs(inst, mu)


def all_matchings(n_men: int, n_women: int) -> Iterator[Matching]:
    def rec(i: int, used: frozenset, acc: tuple):
        if i == n_men:
            yield Matching(acc)
            return
        yield from rec(i + 1, used, acc + (UNMATCHED,))
        for j in range(n_women):
            if j not in used:
                yield from rec(i + 1, used | {j}, acc + (j,))

    yield from rec(0, frozenset(), ())


def weakly_better(inst: Instance, mu2: Matching, mu: Matching) -> bool:
    """``mu2 >= mu``: every agent weakly prefers ``mu2``."""
    r = ranks(inst)
    h2, h = mu2.wife_to_husband(inst.n_women), mu.wife_to_husband(inst.n_women)
    return all(r.man[i][mu2[i]] <= r.man[i][mu[i]] for i in range(inst.n_men)) and all(
        r.woman[j][h2[j]] <= r.woman[j][h[j]] for j in range(inst.n_women)
    )


def pareto_dominates(inst: Instance, mu2: Matching, mu: Matching) -> bool:
    return weakly_better(inst, mu2, mu) and not weakly_better(inst, mu, mu2)


def _weak_improvements(inst: Instance, mu: Matching) -> Iterator[Matching]:
    """Every matching all agents weakly prefer to ``mu`` (including ``mu`` itself)."""
    r = ranks(inst)
    husband = mu.wife_to_husband(inst.n_women)
    options = []
    for i in range(inst.n_men):
        cur = r.man[i][mu[i]]
        opts = [UNMATCHED] if r.man[i][UNMATCHED] <= cur else []
        opts += [j for j in range(inst.n_women) if r.man[i][j] <= cur and r.woman[j][i] <= r.woman[j][husband[j]]]
        options.append(opts)
    may_be_single = [r.woman[j][UNMATCHED] <= r.woman[j][husband[j]] for j in range(inst.n_women)]

    def rec(i: int, used: set, acc: list):
        if i == inst.n_men:
            if all(may_be_single[j] or j in used for j in range(inst.n_women)):
                yield Matching(tuple(acc))
            return
        for j in options[i]:
            if j == UNMATCHED:
                acc.append(j)
                yield from rec(i + 1, used, acc)
                acc.pop()
            elif j not in used:
                used.add(j)
                acc.append(j)
                yield from rec(i + 1, used, acc)
                acc.pop()
                used.discard(j)

    yield from rec(0, set(), [])


def find_dominating(inst: Instance, mu: Matching) -> Matching | None:
    for mu2 in _weak_improvements(inst, mu):
        if not weakly_better(inst, mu, mu2):
            return mu2
    return None


def is_pareto_stable(inst: Instance, mu: Matching, limit: int = 12) -> AuditReport:
    if inst.n_men + inst.n_women > limit:
        raise SizeLimit(f"{inst.n_men}+{inst.n_women} agents exceeds the brute-force limit {limit}")
    report = AuditReport(Property.PARETO_STABILITY)
    for i, j in ir_violations(inst, mu):
        report.witnesses.append({"kind": "individual_rationality", "pair": [i, j]})
    for i, j in strongly_blocking_pairs(inst, mu):
        report.witnesses.append({"kind": "strongly_blocking_pair", "pair": [i, j]})
    if report.passed:
        better = find_dominating(inst, mu)
        if better is not None:
            report.witnesses.append({"kind": "dominated_by", "matching": list(better.assignment)})
    report.profiles_checked = 1
    return report


# strategyproofness


Mechanism = Callable[[Instance], Matching]


class CachedMechanism:
    """Memoizes a mechanism by preference profile."""

    def __init__(self, mechanism: Mechanism = solve):
        self.mechanism = mechanism
        self.cache: dict[Instance, Matching] = {}

    def __call__(self, inst: Instance) -> Matching:
        mu = self.cache.get(inst)
        if mu is None:
            mu = self.cache[inst] = self.mechanism(inst)
        return mu


def misreports(inst: Instance, i: int) -> list[PreferenceOrder]:
    """Every weak order over women plus ``UNMATCHED`` that differs from man ``i``'s truth."""
    truth = inst.men[i]
    return [p for p in _orders(inst.n_women) if not p.same_relation(truth, inst.n_women)]


@functools.lru_cache(maxsize=16)
def _orders(n_women: int) -> tuple[PreferenceOrder, ...]:
    return tuple(preference_orders(n_women))


def _random_misreport(rng: random.Random, inst: Instance, i: int) -> PreferenceOrder:
    while True:
        p = random_order(rng, inst.n_women, rng.random(), rng.random() * 0.5)
        if not p.same_relation(inst.men[i], inst.n_women):
            return p


def _profiles(
    inst: Instance, max_coalition: int, budget: int | None, rng: random.Random, exhaustive_women: int
) -> Iterator[MisreportProfile]:
    men = range(inst.n_men)
    coalitions = [c for size in range(1, max_coalition + 1) for c in itertools.combinations(men, size)]
    if inst.n_women <= exhaustive_women:
        spaces = {i: misreports(inst, i) for i in men}
        produced = 0
        for c in coalitions:
            for lies in itertools.product(*(spaces[i] for i in c)):
                if budget is not None and produced >= budget:
                    return
                produced += 1
                yield MisreportProfile(c, dict(zip(c, lies)))
        return
    if budget is None:
        raise ValueError("a sample budget is required when the misreport space is not enumerated")
    for _ in range(budget if coalitions else 0):
        c = coalitions[rng.randrange(len(coalitions))]
        yield MisreportProfile(c, {i: _random_misreport(rng, inst, i) for i in c})


def _violations(
    inst: Instance, profiles: Iterable[MisreportProfile], mechanism: Mechanism, strong: bool
) -> tuple[int, list[dict]]:
    truthful = mechanism(inst)
    r = ranks(inst)
    checked, witnesses = 0, []
    for profile in profiles:
        lied = inst
        for i, p in profile.reports.items():
            lied = lied.with_man(i, p)
        outcome = mechanism(lied)
        checked += 1
        gains = [r.man[i][truthful[i]] - r.man[i][outcome[i]] for i in profile.coalition]
        if strong:
            violated = all(g >= 0 for g in gains) and any(g > 0 for g in gains)
        else:
            violated = all(g > 0 for g in gains)
        if violated:
            witnesses.append(
                {
                    "coalition": list(profile.coalition),
                    "reports": {
                        str(i): [sorted(g) for g in p.tiers] for i, p in profile.reports.items()
                    },
                    "truthful": list(truthful.assignment),
                    "misreported": list(outcome.assignment),
                }
            )
    return checked, witnesses


def _violations_chunk(args) -> tuple[int, list[dict]]:
    return _violations(*args)


def audit_strategyproofness(
    inst: Instance,
    max_coalition: int = 1,
    budget: int | None = None,
    seed: int = 0,
    mechanism: Mechanism | None = None,
    strong: bool = False,
    exhaustive_women: int = 3,
    parallel: int = 1,
) -> AuditReport:
    """Search for coalitions of men that gain by misreporting.

    A profile violates group strategyproofness when every coalition member
    ends up strictly better off under their true preferences.  With
    ``strong=True`` the weaker requirement is audited instead: all members
    weakly better off and at least one strictly.  ``parallel > 1`` splits the
    profiles across worker processes; witnesses keep profile order.
    """
    if max_coalition not in (0, 1, 2):
        raise ValueError("coalition size must be 1 or 2")
    report = AuditReport(Property.STRATEGYPROOFNESS, seed=seed)
    profiles = _profiles(inst, max_coalition, budget, random.Random(seed), exhaustive_women)
    if parallel <= 1:
        report.profiles_checked, report.witnesses = _violations(inst, profiles, mechanism or CachedMechanism(), strong)
        return report
    profiles = list(profiles)
    mechanism = mechanism or solve
    if isinstance(mechanism, CachedMechanism):
        mechanism = mechanism.mechanism
    size = -(-len(profiles) // parallel) or 1
    chunks = [(inst, profiles[k : k + size], mechanism, strong) for k in range(0, len(profiles), size)]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        for checked, witnesses in pool.map(_violations_chunk, chunks):
            report.profiles_checked += checked
            report.witnesses.extend(witnesses)
    return report


# college admissions


def _bits(s: Iterable[int]) -> int:
    out = 0
    for i in s:
        out |= 1 << i
    return out


@functools.lru_cache(maxsize=1024)
def _responsive_closure(order: PreferenceOrder, n_students: int) -> tuple[frozenset[int], ...]:
    """For each student set (bitmask), the sets it is weakly preferred to."""
    tier = _tier_row(order, n_students)
    acceptable = [tier[i] <= tier[UNMATCHED] for i in range(n_students)]
    size = 1 << n_students
    succ: list[list[int]] = [[] for _ in range(size)]
    for base in range(size):
        outside = [i for i in range(n_students) if not base >> i & 1]
        for i1 in outside:
            if acceptable[i1]:
                succ[base | 1 << i1].append(base)
            for i2 in outside:
                if i2 != i1 and tier[i1] <= tier[i2]:
                    succ[base | 1 << i1].append(base | 1 << i2)
    reach = []
    for start in range(size):
        seen = {start}
        todo = deque([start])
        while todo:
            for nxt in succ[todo.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        reach.append(frozenset(seen))
    return tuple(reach)


def group_weakly_prefers(order: PreferenceOrder, n_students: int, s1: Iterable[int], s2: Iterable[int]) -> bool:
    return _bits(s2) in _responsive_closure(order, n_students)[_bits(s1)]


def college_group_prefers(
    college: PreferenceOrder,
    capacity: int,
    s1: Iterable[int],
    s2: Iterable[int],
    n_students: int | None = None,
    limit: int = 8,
) -> str:
    """Compare two admitted sets under the minimally responsive extension.

    Returns ``"better"``, ``"worse"``, ``"equivalent"`` or ``"incomparable"``
    from the perspective of ``s1``.
    """
    s1, s2 = frozenset(s1), frozenset(s2)
    if len(s1) > capacity or len(s2) > capacity:
        raise ValueError("admitted sets exceed the capacity")
    if n_students is None:
        listed = {x for g in college.tiers for x in g if x != UNMATCHED}
        n_students = max(listed | s1 | s2, default=-1) + 1
    if n_students > limit:
        raise SizeLimit(f"{n_students} students exceeds the closure limit {limit}")
    fwd = group_weakly_prefers(college, n_students, s1, s2)
    back = group_weakly_prefers(college, n_students, s2, s1)
    if fwd and back:
        return "equivalent"
    if fwd:
        return "better"
    if back:
        return "worse"
    return "incomparable"


def college_blocking_pairs(ci: CollegeInstance, mu: CollegeMatching) -> list[tuple[int, int]]:
    st = [_tier_row(p, ci.n_colleges) for p in ci.students]
    co = [_tier_row(p, ci.n_students) for p in ci.colleges]
    out = []
    for i in range(ci.n_students):
        for j in range(ci.n_colleges):
            if st[i][j] >= st[i][mu.assignment[i]]:
                continue
            admitted = mu.admitted(j)
            worse_admit = any(co[j][i] < co[j][k] for k in admitted)
            room = len(admitted) < ci.capacities[j] and co[j][i] < co[j][UNMATCHED]
            if worse_admit or room:
                out.append((i, j))
    return out


def college_ir_violations(ci: CollegeInstance, mu: CollegeMatching) -> list[tuple[int, int]]:
    out = []
    for i, j in enumerate(mu.assignment):
        if j == UNMATCHED:
            continue
        if ci.students[i].prefers(UNMATCHED, j) or ci.colleges[j].prefers(UNMATCHED, i):
            out.append((i, j))
    return out


def capacitated_matchings(ci: CollegeInstance) -> Iterator[CollegeMatching]:
    for assignment in itertools.product([UNMATCHED, *range(ci.n_colleges)], repeat=ci.n_students):
        mu = CollegeMatching(tuple(assignment))
        if mu.respects(ci.capacities):
            yield mu


def college_weakly_better(ci: CollegeInstance, mu2: CollegeMatching, mu: CollegeMatching) -> bool:
    for i, p in enumerate(ci.students):
        if p.prefers(mu.assignment[i], mu2.assignment[i]):
            return False
    return all(
        group_weakly_prefers(p, ci.n_students, mu2.admitted(j), mu.admitted(j)) for j, p in enumerate(ci.colleges)
    )


def is_college_pareto_stable(ci: CollegeInstance, mu: CollegeMatching, limit: int = 8) -> AuditReport:
    if ci.n_students + ci.n_colleges > limit:
        raise SizeLimit(f"{ci.n_students}+{ci.n_colleges} agents exceeds the brute-force limit {limit}")
    report = AuditReport(Property.COLLEGE_PARETO_STABILITY, profiles_checked=1)
    if not mu.respects(ci.capacities):
        report.witnesses.append({"kind": "capacity", "assignment": list(mu.assignment)})
    for i, j in college_ir_violations(ci, mu):
        report.witnesses.append({"kind": "individual_rationality", "pair": [i, j]})
    for i, j in college_blocking_pairs(ci, mu):
        report.witnesses.append({"kind": "strongly_blocking_pair", "pair": [i, j]})
    if report.passed:
        for mu2 in capacitated_matchings(ci):
            if college_weakly_better(ci, mu2, mu) and not college_weakly_better(ci, mu, mu2):
                report.witnesses.append({"kind": "dominated_by", "matching": list(mu2.assignment)})
                break
    return report
