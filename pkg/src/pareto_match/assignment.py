"""Unit-demand auctions with priorities.

A greedy MWM maximizes, in order, total bid weight, number of matched
bidders, and the priority sum of matched bidders.  The three criteria are
folded into one integer edge weight

    W(u, v) = w(u, v) * C1 + C2 + priority(u)

with ``C2 > sum of priorities`` and ``C1 > n * (C2 + max priority)``, and the
resulting maximum-weight matching problem is solved by a Hungarian search
that admits bidders one at a time.  Items are plain hashable ids; the
engine explores them in sorted order, so ids must be mutually comparable.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

Item = Hashable


class SizeLimit(ValueError):
    pass


@dataclass(frozen=True)
class Bidder:
    id: int
    bid: Mapping[Item, int]
    priority: int

    def __post_init__(self) -> None:
        if self.priority < 1:
            raise ValueError(f"bidder {self.id}: priority must be >= 1")
        object.__setattr__(self, "bid", dict(self.bid))

    def __hash__(self) -> int:
        return hash(self.id)


@dataclass(frozen=True)
class Uap:
    bidders: tuple[Bidder, ...]
    items: frozenset

    def __post_init__(self) -> None:
        ids = [b.id for b in self.bidders]
        if len(set(ids)) != len(ids):
            raise ValueError("bidder ids must be distinct")
        for b in self.bidders:
            stray = set(b.bid) - self.items
            if stray:
                raise ValueError(f"bidder {b.id} bids on unknown items {sorted(map(str, stray))}")

    @classmethod
    def of(cls, bidders: Iterable[Bidder], items: Iterable[Item]) -> "Uap":
        return cls(tuple(bidders), frozenset(items))

    def with_bidder(self, b: Bidder) -> "Uap":
        return Uap(self.bidders + (b,), self.items)

    def bidder(self, bidder_id: int) -> Bidder:
        for b in self.bidders:
            if b.id == bidder_id:
                return b
        raise KeyError(bidder_id)


@dataclass(frozen=True)
class Scalarization:
    c1: int
    c2: int
    max_bidders: int
    priority_total: int
    max_priority: int

    @classmethod
    def covering(cls, bidders: Iterable[Bidder]) -> "Scalarization":
        """Smallest admissible constants for any UAP whose bidders are a subset of ``bidders``."""
        prios = [b.priority for b in bidders]
        n, total, top = len(prios), sum(prios), max(prios, default=0)
        c2 = total + 1
        return cls(n * (c2 + top) + 1, c2, n, total, top)

    def admits(self, bidders: Iterable[Bidder]) -> bool:
        prios = [b.priority for b in bidders]
        return (
            len(prios) <= self.max_bidders
            and sum(prios) <= self.priority_total
            and max(prios, default=0) <= self.max_priority
        )

    def weight(self, b: Bidder, item: Item) -> int:
        return b.bid[item] * self.c1 + self.c2 + b.priority


def scalarize(uap: Uap) -> dict[tuple[int, Item], int]:
    scale = Scalarization.covering(uap.bidders)
    return {(b.id, v): scale.weight(b, v) for b in uap.bidders for v in b.bid}


@dataclass(frozen=True)
class UapMatching:
    edges: frozenset[tuple[int, Item]]
    bidder_potential: Mapping[int, int] = field(default_factory=dict, compare=False)
    item_potential: Mapping[Item, int] = field(default_factory=dict, compare=False)
    scale: Scalarization | None = field(default=None, compare=False)

    def matched_bidders(self) -> set[int]:
        return {u for u, _ in self.edges}

    def item_of(self, bidder_id: int) -> Item | None:
        for u, v in self.edges:
            if u == bidder_id:
                return v
        return None


def matching_key(uap: Uap, edges: Iterable[tuple[int, Item]]) -> tuple[int, int, int]:
    """(total bid weight, cardinality, priority sum) of a matching."""
    by_id = {b.id: b for b in uap.bidders}
    edges = list(edges)
    return (
        sum(by_id[u].bid[v] for u, v in edges),
        len(edges),
        sum(by_id[u].priority for u, _ in edges),
    )


def priority_multiset(uap: Uap, edges: Iterable[tuple[int, Item]]) -> Counter:
    by_id = {b.id: b for b in uap.bidders}
    return Counter(by_id[u].priority for u, _ in edges)


TraceHook = Callable[[dict], None]


class AuctionEngine:
    """Mutable greedy-MWM state: revealed bidders, matching, dual potentials.

    Dual feasibility is kept at all times: for every edge of positive
    scalarized weight ``pot[u] + pot[v] >= W(u, v)``, all potentials are
    nonnegative, matched edges are tight, and unmatched vertices sit at zero.
    """

    def __init__(self, items: Iterable[Item], scale: Scalarization, trace: TraceHook | None = None):
        self.items = frozenset(items)
        self.scale = scale
        self.trace = trace
        self.bidders: dict[int, Bidder] = {}
        # Only edges with nonnegative bid weight can be in a maximum-weight matching.
        self.adj: dict[int, list[tuple[Item, int]]] = {}
        self.bidder_pot: dict[int, int] = {}
        self.item_pot: dict[Item, int] = {v: 0 for v in self.items}
        self.mate_of_bidder: dict[int, Item] = {}
        self.mate_of_item: dict[Item, int] = {}
        self.augmentations = 0

    def add(self, b: Bidder) -> int | None:
        """Reveal ``b`` and restore optimality; return the id of a bidder left unmatched by it, if any."""
        if b.id in self.bidders:
            raise ValueError(f"bidder {b.id} already present")
        if not self.scale.admits(list(self.bidders.values()) + [b]):
            raise ValueError("scalarization constants too small for this bidder set")
        self.bidders[b.id] = b
        edges = sorted(
            ((v, self.scale.weight(b, v)) for v, w in b.bid.items() if w >= 0),
            key=lambda e: _order_key(e[0]),
        )
        self.adj[b.id] = edges
        best = max((wt - self.item_pot[v] for v, wt in edges), default=0)
        self.bidder_pot[b.id] = max(0, best)
        if self.bidder_pot[b.id] == 0:
            self._emit(b.id, None, None, 0)
            return b.id
        return self._search(b.id)

    def _search(self, root: int) -> int | None:
        pot_u, pot_v = self.bidder_pot, self.item_pot
        tree_bidders = [root]
        in_tree_items: set[Item] = set()
        via_item: dict[int, Item] = {}
        slack: dict[Item, int] = {}
        slack_from: dict[Item, int] = {}

        def scan(x: int) -> None:
            px = pot_u[x]
            for v, wt in self.adj[x]:
                if v in in_tree_items:
                    continue
                s = px + pot_v[v] - wt
                if v not in slack or s < slack[v]:
                    slack[v] = s
                    slack_from[v] = x

        scan(root)
        while True:
            item, d_item = None, None
            for v, s in slack.items():
                if d_item is None or s < d_item or (s == d_item and _order_key(v) < _order_key(item)):
                    item, d_item = v, s
            d_bid, low = min((pot_u[x], x) for x in tree_bidders)
            if d_item is not None and d_item <= d_bid:
                delta = d_item
            else:
                delta, item = d_bid, None
            if delta:
                for x in tree_bidders:
                    pot_u[x] -= delta
                for v in in_tree_items:
                    pot_v[v] += delta
                for v in slack:
                    slack[v] -= delta
            if item is None:
                dropped = low
                displaced = dropped if dropped != root else None
                length = self._augment(root, via_item, slack_from, end_bidder=dropped)
                self._emit(root, self.mate_of_bidder.get(root), displaced, length)
                return dropped
            del slack[item]
            owner = self.mate_of_item.get(item)
            if owner is None:
                length = self._augment(root, via_item, slack_from, end_item=item)
                self._emit(root, self.mate_of_bidder.get(root), None, length)
                return None
            in_tree_items.add(item)
            via_item[owner] = item
            tree_bidders.append(owner)
            scan(owner)

    def _augment(self, root, via_item, slack_from, end_item=None, end_bidder=None) -> int:
        self.augmentations += 1
        length = 0
        if end_bidder is not None:
            if end_bidder == root:
                return 0
            end_item = via_item[end_bidder]
            del self.mate_of_bidder[end_bidder]
        v = end_item
        while True:
            x = slack_from[v]
            prev = via_item.get(x)
            self.mate_of_bidder[x] = v
            self.mate_of_item[v] = x
            length += 1
            if x == root:
                return length
            v = prev

    def _emit(self, bidder: int, item, displaced, length: int) -> None:
        if self.trace is not None:
            self.trace({"bidder": bidder, "item": item, "displaced": displaced, "path_length": length})

    def is_matched(self, bidder_id: int) -> bool:
        return bidder_id in self.mate_of_bidder

    def uap(self) -> Uap:
        return Uap(tuple(self.bidders.values()), self.items)

    def matching(self) -> UapMatching:
        return UapMatching(
            frozenset(self.mate_of_bidder.items()),
            dict(self.bidder_pot),
            dict(self.item_pot),
            self.scale,
        )

    @classmethod
    def resume(cls, uap: Uap, matching: UapMatching, trace: TraceHook | None = None) -> "AuctionEngine":
        assert matching.scale is not None
        eng = cls(uap.items, matching.scale, trace)
        for b in uap.bidders:
            eng.bidders[b.id] = b
            eng.adj[b.id] = sorted(
                ((v, eng.scale.weight(b, v)) for v, w in b.bid.items() if w >= 0),
                key=lambda e: _order_key(e[0]),
            )
        eng.bidder_pot = {b.id: matching.bidder_potential.get(b.id, 0) for b in uap.bidders}
        eng.item_pot.update(matching.item_potential)
        for u, v in matching.edges:
            eng.mate_of_bidder[u] = v
            eng.mate_of_item[v] = u
        return eng


def _order_key(item: Item):
    # Mixed item types (e.g. ints and tuples) are ordered by type name first.
    return (type(item).__name__, item)


def greedy_mwm(uap: Uap, scale: Scalarization | None = None) -> UapMatching:
    """Greedy MWM of ``uap`` with dual potentials as an optimality certificate.

    Bidders are admitted in increasing id order.  ``scale`` may be supplied
    to reserve room for bidders added later with :func:`add_bidder`.
    """
    scale = scale or Scalarization.covering(uap.bidders)
    eng = AuctionEngine(uap.items, scale)
    for b in sorted(uap.bidders, key=lambda b: b.id):
        eng.add(b)
    return eng.matching()


def add_bidder(uap: Uap, matching: UapMatching, b: Bidder) -> tuple[Uap, UapMatching]:
    """Admit one bidder with a single Hungarian search.

    Falls back to a from-scratch solve when the matching's scalarization
    constants cannot cover the enlarged bidder set.
    """
    if any(x.id == b.id for x in uap.bidders):
        raise ValueError(f"bidder {b.id} already in the auction")
    grown = uap.with_bidder(b)
    if matching.scale is None or not matching.scale.admits(grown.bidders):
        return grown, greedy_mwm(grown)
    eng = AuctionEngine.resume(uap, matching)
    eng.add(b)
    return grown, eng.matching()


def greedy_count(uap: Uap, priority: int, matching: UapMatching | None = None) -> int:
    matching = matching or greedy_mwm(uap)
    by_id = {b.id: b for b in uap.bidders}
    return sum(1 for u, _ in matching.edges if by_id[u].priority == priority)


def check_certificate(uap: Uap, matching: UapMatching) -> list[str]:
    """Problems with the dual certificate attached to ``matching`` (empty if it proves optimality)."""
    scale = matching.scale
    if scale is None:
        return ["no scalarization attached"]
    problems = []
    pu, pv = matching.bidder_potential, matching.item_potential
    matched = dict(matching.edges)
    matched_items = set(matched.values())
    for b in uap.bidders:
        if pu.get(b.id, 0) < 0:
            problems.append(f"negative potential on bidder {b.id}")
        if b.id not in matched and pu.get(b.id, 0) != 0:
            problems.append(f"unmatched bidder {b.id} has nonzero potential")
        for v in b.bid:
            wt = scale.weight(b, v)
            total = pu.get(b.id, 0) + pv.get(v, 0)
            if total < wt:
                problems.append(f"edge ({b.id}, {v}) violates dual feasibility")
            if matched.get(b.id) == v and total != wt:
                problems.append(f"matched edge ({b.id}, {v}) is not tight")
    for v in uap.items:
        if pv.get(v, 0) < 0:
            problems.append(f"negative potential on item {v}")
        if v not in matched_items and pv.get(v, 0) != 0:
            problems.append(f"unmatched item {v} has nonzero potential")
    return problems


def all_matchings(uap: Uap) -> Iterable[frozenset[tuple[int, Item]]]:
    bidders = sorted(uap.bidders, key=lambda b: b.id)

    def rec(k: int, used: frozenset, acc: tuple):
        if k == len(bidders):
            yield frozenset(acc)
            return
        yield from rec(k + 1, used, acc)
        b = bidders[k]
        for v in b.bid:
            if v not in used:
                yield from rec(k + 1, used | {v}, acc + ((b.id, v),))

    yield from rec(0, frozenset(), ())


def all_greedy_mwms(uap: Uap, limit: int = 12) -> set[frozenset[tuple[int, Item]]]:
    """Every greedy MWM of a small UAP, by exhaustive enumeration."""
    if len(uap.bidders) + len(uap.items) > limit:
        raise SizeLimit(f"{len(uap.bidders)} bidders + {len(uap.items)} items exceeds {limit}")
    scored = [(matching_key(uap, m), m) for m in all_matchings(uap)]
    best = max(k for k, _ in scored)
    return {m for k, m in scored if k == best}


def mwm_bidder_sets(uap: Uap, limit: int = 12) -> set[frozenset[int]]:
    """Bidder sets matched by some maximum-weight matching (not necessarily greedy)."""
    if len(uap.bidders) + len(uap.items) > limit:
        raise SizeLimit(f"{len(uap.bidders)} bidders + {len(uap.items)} items exceeds {limit}")
    scored = [(matching_key(uap, m)[0], m) for m in all_matchings(uap)]
    best = max(k for k, _ in scored)
    return {frozenset(u for u, _ in m) for k, m in scored if k == best}


def _subsets(s: Iterable[int]) -> Iterable[frozenset[int]]:
    s = sorted(s)
    return (frozenset(c) for r in range(len(s) + 1) for c in itertools.combinations(s, r))


def independent_sets(uap: Uap, limit: int = 12) -> set[frozenset[int]]:
    """{U' : some MWM matches every bidder of U'}."""
    family: set[frozenset[int]] = set()
    for top in mwm_bidder_sets(uap, limit):
        family.update(_subsets(top))
    return family
