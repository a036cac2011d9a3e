"""Stable-marriage instances with ties and incomplete lists.

Agents are referred to by their 0-based position in input order.  A
preference order is a sequence of tie-groups over the opposite side plus the
``UNMATCHED`` token; opposite-side agents that are not listed rank strictly
below ``UNMATCHED``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

UNMATCHED = -1
UNMATCHED_TOKEN = "@unmatched"


class Side(Enum):
    MAN = "man"
    WOMAN = "woman"


@dataclass(frozen=True, order=True)
class AgentId:
    side: Side
    index: int


class InstanceError(ValueError):
    """Base class for instance documents that cannot be accepted."""


class MalformedDocument(InstanceError):
    pass


class DuplicateEntry(InstanceError):
    pass


class UnknownAgent(InstanceError):
    pass


class EmptyTier(InstanceError):
    pass


@dataclass(frozen=True)
class Violation:
    rule: str
    side: Side
    agent: int
    detail: str

    def __str__(self) -> str:
        return f"{self.rule}({self.side.value} {self.agent}: {self.detail})"


@dataclass(frozen=True)
class PreferenceOrder:
    """Weak order as tie-groups, best first.

    Entries are opposite-side indices or ``UNMATCHED``.  Construct through
    :meth:`of` to get the normalized form; the raw constructor keeps whatever
    it is given so that :func:`validate` can report on it.
    """

    tiers: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, tiers: Iterable[Iterable[int]]) -> "PreferenceOrder":
        groups = [frozenset(t) for t in tiers]
        if not any(UNMATCHED in g for g in groups):
            groups.append(frozenset({UNMATCHED}))
        return cls(tuple(groups))

    def tier_of(self, entry: int) -> int:
        """Tier index of ``entry``; unlisted agents share the index ``len(tiers)``."""
        for k, group in enumerate(self.tiers):
            if entry in group:
                return k
        return len(self.tiers)

    def tier_map(self) -> dict[int, int]:
        return {e: k for k, group in enumerate(self.tiers) for e in group}

    @property
    def unmatched_tier(self) -> int:
        return self.tier_of(UNMATCHED)

    def prefers(self, x: int, y: int) -> bool:
        """True if ``x`` is strictly preferred to ``y``."""
        return self.tier_of(x) < self.tier_of(y)

    def weakly_prefers(self, x: int, y: int) -> bool:
        return self.tier_of(x) <= self.tier_of(y)

    def acceptable(self, x: int) -> bool:
        return self.weakly_prefers(x, UNMATCHED)

    def full_tiers(self, n_opposite: int) -> tuple[frozenset[int], ...]:
        """Tiers over every opposite agent and ``UNMATCHED``, unlisted agents as a bottom tier."""
        listed = set().union(*self.tiers) if self.tiers else set()
        rest = frozenset(x for x in range(n_opposite) if x not in listed)
        return self.tiers + ((rest,) if rest else ())

    def same_relation(self, other: "PreferenceOrder", n_opposite: int) -> bool:
        return self.full_tiers(n_opposite) == other.full_tiers(n_opposite)


@dataclass(frozen=True)
class Instance:
    men: tuple[PreferenceOrder, ...]
    women: tuple[PreferenceOrder, ...]
    man_names: tuple[str, ...] = field(default=(), compare=False)
    woman_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.man_names:
            object.__setattr__(self, "man_names", tuple(f"m{i + 1}" for i in range(len(self.men))))
        if not self.woman_names:
            object.__setattr__(self, "woman_names", tuple(f"w{j + 1}" for j in range(len(self.women))))

    @classmethod
    def from_tiers(
        cls,
        men: Sequence[Iterable[Iterable[int]]],
        women: Sequence[Iterable[Iterable[int]]],
        man_names: Sequence[str] = (),
        woman_names: Sequence[str] = (),
    ) -> "Instance":
        return cls(
            tuple(PreferenceOrder.of(t) for t in men),
            tuple(PreferenceOrder.of(t) for t in women),
            tuple(man_names),
            tuple(woman_names),
        )

    @property
    def n_men(self) -> int:
        return len(self.men)

    @property
    def n_women(self) -> int:
        return len(self.women)

    def with_man(self, i: int, order: PreferenceOrder) -> "Instance":
        men = list(self.men)
        men[i] = order
        return Instance(tuple(men), self.women, self.man_names, self.woman_names)


@dataclass(frozen=True)
class RankUtilities:
    """Integer utilities from the counting rule.

    ``a[i]`` has one column per woman plus a final column for being
    unmatched, and ``b`` has one row per man plus a final row for the
    unmatched man, so ``a[i][UNMATCHED]`` and ``b[UNMATCHED][j]`` index the
    reserve entries directly.
    """

    a: tuple[tuple[int, ...], ...]
    b: tuple[tuple[int, ...], ...]


def _count_utilities(order: PreferenceOrder, n_opposite: int) -> tuple[int, ...]:
    bottom = len(order.tiers)
    where = order.tier_map()
    tiers = [where.get(e, bottom) for e in range(n_opposite)] + [where.get(UNMATCHED, bottom)]
    # at_or_below[k] = number of entries whose tier index is >= k
    at_or_below = [0] * (bottom + 2)
    for t in tiers:
        at_or_below[t] += 1
    for k in range(bottom - 1, -1, -1):
        at_or_below[k] += at_or_below[k + 1]
    return tuple(at_or_below[t] for t in tiers)


def rank_utilities(inst: Instance) -> RankUtilities:
    a = tuple(_count_utilities(p, inst.n_women) for p in inst.men)
    columns = [_count_utilities(p, inst.n_men) for p in inst.women]
    b = tuple(tuple(col[i] for col in columns) for i in range(inst.n_men + 1))
    return RankUtilities(a, b)


def validate(inst: Instance) -> list[Violation]:
    reports: list[Violation] = []
    sides = ((Side.MAN, inst.men, inst.n_women), (Side.WOMAN, inst.women, inst.n_men))
    for side, orders, n_opposite in sides:
        for agent, order in enumerate(orders):
            seen: set[int] = set()
            for k, group in enumerate(order.tiers):
                if not group:
                    reports.append(Violation("EmptyTier", side, agent, f"tier {k + 1}"))
                for entry in sorted(group):
                    if entry != UNMATCHED and not 0 <= entry < n_opposite:
                        reports.append(Violation("UnknownAgent", side, agent, f"index {entry}"))
                    elif entry in seen:
                        reports.append(Violation("DuplicateEntry", side, agent, f"index {entry}"))
                    seen.add(entry)
    return reports


_ERRORS = {"EmptyTier": EmptyTier, "UnknownAgent": UnknownAgent, "DuplicateEntry": DuplicateEntry}


def _parse_side(
    raw: object, side: str, own: list[str], opposite: dict[str, int]
) -> list[PreferenceOrder]:
    if not isinstance(raw, dict):
        raise MalformedDocument(f"'{side}' must be an object mapping names to tier lists")
    orders = []
    for name, tiers in raw.items():
        if not isinstance(tiers, list) or not all(isinstance(t, list) for t in tiers):
            raise MalformedDocument(f"{side} '{name}': preferences must be a list of lists")
        groups: list[list[int]] = []
        seen: set[str] = set()
        for k, tier in enumerate(tiers):
            if not tier:
                raise EmptyTier(f"{side} '{name}': tier {k + 1} is empty")
            group = []
            for entry in tier:
                if not isinstance(entry, str):
                    raise MalformedDocument(f"{side} '{name}': entries must be strings")
                if entry in seen:
                    raise DuplicateEntry(f"{side} '{name}' lists '{entry}' twice")
                seen.add(entry)
                if entry == UNMATCHED_TOKEN:
                    group.append(UNMATCHED)
                elif entry in opposite:
                    group.append(opposite[entry])
                else:
                    raise UnknownAgent(f"{side} '{name}' lists unknown agent '{entry}'")
            groups.append(group)
        own.append(name)
        orders.append(PreferenceOrder.of(groups))
    return orders


def instance_from_dict(doc: object) -> Instance:
    if not isinstance(doc, dict) or set(doc) - {"men", "women"}:
        raise MalformedDocument("expected an object with keys 'men' and 'women'")
    men_raw = doc.get("men", {})
    women_raw = doc.get("women", {})
    if not isinstance(men_raw, dict) or not isinstance(women_raw, dict):
        raise MalformedDocument("'men' and 'women' must be objects")
    man_index = {name: i for i, name in enumerate(men_raw)}
    woman_index = {name: j for j, name in enumerate(women_raw)}
    if set(man_index) & {UNMATCHED_TOKEN} or set(woman_index) & {UNMATCHED_TOKEN}:
        raise MalformedDocument(f"'{UNMATCHED_TOKEN}' is reserved")
    man_names: list[str] = []
    woman_names: list[str] = []
    men = _parse_side(men_raw, "man", man_names, woman_index)
    women = _parse_side(women_raw, "woman", woman_names, man_index)
    inst = Instance(tuple(men), tuple(women), tuple(man_names), tuple(woman_names))
    problems = validate(inst)
    if problems:
        raise _ERRORS[problems[0].rule](str(problems[0]))
    return inst


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)


def _tiers_to_names(order: PreferenceOrder, names: Sequence[str]) -> list[list[str]]:
    return [
        [UNMATCHED_TOKEN if e == UNMATCHED else names[e] for e in sorted(group, key=lambda x: (x == UNMATCHED, x))]
        for group in order.tiers
    ]


def instance_to_dict(inst: Instance) -> dict:
    return {
        "men": {n: _tiers_to_names(p, inst.woman_names) for n, p in zip(inst.man_names, inst.men)},
        "women": {n: _tiers_to_names(p, inst.man_names) for n, p in zip(inst.woman_names, inst.women)},
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2)
