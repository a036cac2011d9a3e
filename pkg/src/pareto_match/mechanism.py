"""Group-strategyproof Pareto-stable matching via iterated auctions.

Each man becomes a multibidder with one bidder per acceptable preference
tier; each woman becomes an item and each man also gets a private dummy
item standing for "unmatched".  A bidder's offer to woman ``j`` is
``b[i][j] - b[unmatched][j]``, so offers encode the women's preferences while
the tiers encode the men's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .assignment import Bidder
from .model import (
    UNMATCHED,
    Instance,
    MalformedDocument,
    PreferenceOrder,
    UnknownAgent,
    instance_from_dict,
    instance_to_dict,
    rank_utilities,
)
from .reveal import Configuration, Iuap, Multibidder, Policy, run_reveals


@dataclass(frozen=True)
class Matching:
    """``assignment[i]`` is man ``i``'s partner index or ``UNMATCHED``."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        taken = [j for j in self.assignment if j != UNMATCHED]
        if len(taken) != len(set(taken)):
            raise ValueError("a woman is assigned to more than one man")

    @classmethod
    def empty(cls, n_men: int) -> "Matching":
        return cls((UNMATCHED,) * n_men)

    @classmethod
    def from_pairs(cls, n_men: int, pairs: Iterable[tuple[int, int]]) -> "Matching":
        out = [UNMATCHED] * n_men
        for i, j in pairs:
            out[i] = j
        return cls(tuple(out))

    def __getitem__(self, i: int) -> int:
        return self.assignment[i]

    def __len__(self) -> int:
        return len(self.assignment)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in enumerate(self.assignment) if j != UNMATCHED]

    def wife_to_husband(self, n_women: int) -> list[int]:
        husband = [UNMATCHED] * n_women
        for i, j in self.pairs():
            husband[j] = i
        return husband


@dataclass(frozen=True)
class PriorityAssignment:
    pi: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.pi) != list(range(1, len(self.pi) + 1)):
            raise ValueError(f"priorities must be a permutation of 1..{len(self.pi)}")


def assign_priorities(inst: Instance) -> PriorityAssignment:
    """First-listed man gets the highest priority; reads positions only."""
    n = inst.n_men
    return PriorityAssignment(tuple(n - k for k in range(n)))


def dummy_item(i: int) -> tuple[str, int]:
    return ("dummy", i)


@dataclass(frozen=True)
class AuctionLayout:
    iuap: Iuap
    owner: dict[int, tuple[int, int]] = field(compare=False)

    def woman_of_item(self, item) -> int:
        return UNMATCHED if isinstance(item, tuple) else item


def build_iuap(inst: Instance, pr: PriorityAssignment | None = None) -> AuctionLayout:
    pr = pr or assign_priorities(inst)
    b = rank_utilities(inst).b
    items = frozenset(range(inst.n_women)) | {dummy_item(i) for i in range(inst.n_men)}
    multibidders = []
    owner: dict[int, tuple[int, int]] = {}
    next_id = 0
    for i, order in enumerate(inst.men):
        bidders = []
        # Tiers below the one holding UNMATCHED are unacceptable and never bid.
        for k, tier in enumerate(order.tiers[: order.unmatched_tier + 1]):
            bid = {}
            for j in tier:
                if j == UNMATCHED:
                    bid[dummy_item(i)] = 0
                else:
                    bid[j] = b[i][j] - b[UNMATCHED][j]
            bidders.append(Bidder(next_id, bid, pr.pi[i]))
            owner[next_id] = (i, k)
            next_id += 1
        multibidders.append(Multibidder(tuple(bidders), pr.pi[i]))
    return AuctionLayout(Iuap(tuple(multibidders), items), owner)


def extract_matching(layout: AuctionLayout, conf: Configuration, n_men: int) -> Matching:
    out = [UNMATCHED] * n_men
    for bidder_id, item in conf.engine.mate_of_bidder.items():
        woman = layout.woman_of_item(item)
        if woman != UNMATCHED:
            out[layout.owner[bidder_id][0]] = woman
    return Matching(tuple(out))


def solve(
    inst: Instance,
    pr: PriorityAssignment | None = None,
    policy: str | Policy = "fifo",
    trace: Callable[[dict], None] | None = None,
) -> Matching:
    layout = build_iuap(inst, pr)
    conf = run_reveals(layout.iuap, policy, trace)
    return extract_matching(layout, conf, inst.n_men)


def matching_to_dict(inst: Instance, mu: Matching) -> dict:
    return {
        "matching": {
            name: None if j == UNMATCHED else inst.woman_names[j] for name, j in zip(inst.man_names, mu.assignment)
        }
    }


def matching_from_dict(inst: Instance, doc: object) -> Matching:
    """Accepts ``{"matching": {man: woman | null}}`` or the bare inner object; omitted men are unmatched."""
    if isinstance(doc, dict) and isinstance(doc.get("matching"), dict):
        doc = doc["matching"]
    if not isinstance(doc, dict):
        raise MalformedDocument("a matching must be an object mapping men to women or null")
    man_index = {n: i for i, n in enumerate(inst.man_names)}
    woman_index = {n: j for j, n in enumerate(inst.woman_names)}
    out = [UNMATCHED] * inst.n_men
    for man, woman in doc.items():
        if man not in man_index:
            raise UnknownAgent(f"unknown man '{man}'")
        if woman is None:
            continue
        if woman not in woman_index:
            raise UnknownAgent(f"unknown woman '{woman}'")
        out[man_index[man]] = woman_index[woman]
    try:
        return Matching(tuple(out))
    except ValueError as exc:
        raise MalformedDocument(str(exc)) from exc


# college admissions


@dataclass(frozen=True)
class CollegeInstance:
    students: tuple[PreferenceOrder, ...]
    colleges: tuple[PreferenceOrder, ...]
    capacities: tuple[int, ...]
    student_names: tuple[str, ...] = field(default=(), compare=False)
    college_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if len(self.capacities) != len(self.colleges):
            raise ValueError("one capacity per college required")
        if any(c < 1 for c in self.capacities):
            raise ValueError("capacities must be >= 1")
        if not self.student_names:
            object.__setattr__(self, "student_names", tuple(f"s{i + 1}" for i in range(len(self.students))))
        if not self.college_names:
            object.__setattr__(self, "college_names", tuple(f"c{j + 1}" for j in range(len(self.colleges))))

    @classmethod
    def from_tiers(
        cls,
        students: Sequence[Iterable[Iterable[int]]],
        colleges: Sequence[Iterable[Iterable[int]]],
        capacities: Sequence[int],
    ) -> "CollegeInstance":
        return cls(
            tuple(PreferenceOrder.of(t) for t in students),
            tuple(PreferenceOrder.of(t) for t in colleges),
            tuple(capacities),
        )

    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def n_colleges(self) -> int:
        return len(self.colleges)


@dataclass(frozen=True)
class CollegeMatching:
    assignment: tuple[int, ...]

    def admitted(self, college: int) -> frozenset[int]:
        return frozenset(i for i, j in enumerate(self.assignment) if j == college)

    def respects(self, capacities: Sequence[int]) -> bool:
        return all(len(self.admitted(j)) <= c for j, c in enumerate(capacities))


def expand_college(ci: CollegeInstance) -> tuple[Instance, tuple[int, ...]]:
    """Split each college into tied unit-capacity slots; returns the instance and slot -> college."""
    slot_map: list[int] = []
    slots_of: list[list[int]] = []
    for j, cap in enumerate(ci.capacities):
        slots_of.append(list(range(len(slot_map), len(slot_map) + cap)))
        slot_map.extend([j] * cap)
    men = []
    for order in ci.students:
        tiers = []
        for group in order.tiers:
            expanded = set()
            for j in group:
                expanded.update([UNMATCHED] if j == UNMATCHED else slots_of[j])
            tiers.append(frozenset(expanded))
        men.append(PreferenceOrder(tuple(tiers)))
    women = [ci.colleges[j] for j in slot_map]
    slot_names = [
        f"{ci.college_names[j]}#{k + 1}" for j, slots in enumerate(slots_of) for k in range(len(slots))
    ]
    inst = Instance(tuple(men), tuple(women), ci.student_names, tuple(slot_names))
    return inst, tuple(slot_map)


def solve_college(ci: CollegeInstance, pr: PriorityAssignment | None = None) -> CollegeMatching:
    inst, slot_map = expand_college(ci)
    mu = solve(inst, pr)
    return CollegeMatching(tuple(UNMATCHED if s == UNMATCHED else slot_map[s] for s in mu.assignment))


def college_from_dict(doc: object) -> CollegeInstance:
    """``{"students": {s: tiers}, "colleges": {c: {"capacity": k, "preferences": tiers}}}``."""
    if not isinstance(doc, dict) or set(doc) != {"students", "colleges"}:
        raise MalformedDocument("expected an object with keys 'students' and 'colleges'")
    colleges = doc["colleges"]
    if not isinstance(colleges, dict):
        raise MalformedDocument("'colleges' must be an object")
    capacities = []
    prefs = {}
    for name, entry in colleges.items():
        if not isinstance(entry, dict) or set(entry) != {"capacity", "preferences"}:
            raise MalformedDocument(f"college '{name}' needs 'capacity' and 'preferences'")
        cap = entry["capacity"]
        if not isinstance(cap, int) or isinstance(cap, bool) or cap < 1:
            raise MalformedDocument(f"college '{name}': capacity must be a positive integer")
        capacities.append(cap)
        prefs[name] = entry["preferences"]
    # Same validation as a marriage instance with students as men.
    inst = instance_from_dict({"men": doc["students"], "women": prefs})
    return CollegeInstance(inst.men, inst.women, tuple(capacities), inst.man_names, inst.woman_names)


def college_to_dict(ci: CollegeInstance) -> dict:
    inst = instance_to_dict(Instance(ci.students, ci.colleges, ci.student_names, ci.college_names))
    return {
        "students": inst["men"],
        "colleges": {
            name: {"capacity": cap, "preferences": inst["women"][name]}
            for name, cap in zip(ci.college_names, ci.capacities)
        },
    }


def college_matching_to_dict(ci: CollegeInstance, mu: CollegeMatching) -> dict:
    return {
        "matching": {
            s: None if j == UNMATCHED else ci.college_names[j] for s, j in zip(ci.student_names, mu.assignment)
        },
        "admitted": {
            c: sorted((ci.student_names[i] for i in mu.admitted(j)), key=ci.student_names.index)
            for j, c in enumerate(ci.college_names)
        },
    }
