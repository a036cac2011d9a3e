"""Iterated auctions: multibidders reveal their bids one at a time.

A multibidder owns a sequence of bidders sharing one priority.  Its next
bidder becomes ready once every bidder it has revealed so far is unmatched in
the maintained greedy MWM.  Revealing ready bidders until none remain yields
a final auction that does not depend on the order of reveals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .assignment import AuctionEngine, Bidder, Item, Scalarization, TraceHook, Uap, UapMatching


class NotReady(ValueError):
    pass


@dataclass(frozen=True)
class Multibidder:
    bidders: tuple[Bidder, ...]
    priority: int

    def __post_init__(self) -> None:
        ids = [b.id for b in self.bidders]
        if len(set(ids)) != len(ids):
            raise ValueError("bidder ids within a multibidder must be distinct")
        if any(b.priority != self.priority for b in self.bidders):
            raise ValueError("all bidders of a multibidder share its priority")


@dataclass(frozen=True)
class Iuap:
    multibidders: tuple[Multibidder, ...]
    items: frozenset

    def __post_init__(self) -> None:
        prios = [t.priority for t in self.multibidders]
        if len(set(prios)) != len(prios):
            raise ValueError("multibidder priorities must be pairwise distinct")
        ids = [b.id for t in self.multibidders for b in t.bidders]
        if len(set(ids)) != len(ids):
            raise ValueError("bidder ids must be globally distinct")
        for b in self.all_bidders():
            if set(b.bid) - self.items:
                raise ValueError(f"bidder {b.id} bids on unknown items")

    def all_bidders(self) -> list[Bidder]:
        return [b for t in self.multibidders for b in t.bidders]


class Configuration:
    """A revealed auction together with its source IUAP.

    Revealed bidders always form a prefix of each multibidder's sequence.
    The greedy MWM of the revealed auction is maintained incrementally.
    """

    def __init__(self, source: Iuap, trace: Callable[[dict], None] | None = None):
        self.source = source
        self.reveal_count = [0] * len(source.multibidders)
        self._owner = {b.id: (t, k) for t, mb in enumerate(source.multibidders) for k, b in enumerate(mb.bidders)}
        self._matched_per_mb = [0] * len(source.multibidders)
        self._trace = trace
        self._steps = 0
        self._last_event: dict = {}
        self.engine = AuctionEngine(
            source.items, Scalarization.covering(source.all_bidders()), self._on_augment
        )

    def _on_augment(self, record: dict) -> None:
        self._last_event = record

    @property
    def revealed(self) -> Uap:
        return self.engine.uap()

    @property
    def matching(self) -> UapMatching:
        return self.engine.matching()

    def multibidder_of(self, bidder_id: int) -> int:
        return self._owner[bidder_id][0]

    def is_ready(self, t: int) -> bool:
        mb = self.source.multibidders[t]
        return self.reveal_count[t] < len(mb.bidders) and self._matched_per_mb[t] == 0

    def ready_set(self) -> list[Bidder]:
        return [
            self.source.multibidders[t].bidders[self.reveal_count[t]]
            for t in range(len(self.source.multibidders))
            if self.is_ready(t)
        ]

    def reveal(self, u: Bidder) -> int | None:
        """Reveal ready bidder ``u``; return the multibidder left with no matched bidder, if any."""
        t, k = self._owner.get(u.id, (None, None))
        if t is None or k != self.reveal_count[t] or not self.is_ready(t):
            raise NotReady(f"bidder {u.id} is not ready")
        dropped = self.engine.add(u)
        self.reveal_count[t] += 1
        if self.engine.is_matched(u.id):
            self._matched_per_mb[t] += 1
        freed = None
        if dropped is not None and dropped != u.id:
            freed = self._owner[dropped][0]
            self._matched_per_mb[freed] -= 1
        elif dropped == u.id:
            freed = t
        self._steps += 1
        if self._trace is not None:
            self._trace(
                {
                    "step": self._steps,
                    "multibidder": t,
                    "tier": k,
                    "bidder": u.id,
                    "matched_after": self.engine.is_matched(u.id),
                    "item": self.engine.mate_of_bidder.get(u.id),
                    "displaced": dropped if dropped not in (None, u.id) else None,
                    "path_length": self._last_event.get("path_length", 0),
                }
            )
        return freed

    def greedy_count(self, priority: int) -> int:
        return sum(1 for u in self.engine.mate_of_bidder if self.engine.bidders[u].priority == priority)

    def tail_holds(self) -> bool:
        for u in self.engine.mate_of_bidder:
            t, k = self._owner[u]
            if k != self.reveal_count[t] - 1:
                return False
        return True

    def prefix_holds(self) -> bool:
        revealed = set(self.engine.bidders)
        for t, mb in enumerate(self.source.multibidders):
            ids = [b.id for b in mb.bidders]
            if set(ids[: self.reveal_count[t]]) != revealed & set(ids):
                return False
        return True


Policy = Callable[[Sequence[Bidder]], Bidder]


def random_policy(seed: int) -> Policy:
    rng = random.Random(seed)
    return lambda ready: ready[rng.randrange(len(ready))]


def run_reveals(
    source: Iuap,
    policy: str | Policy = "fifo",
    trace: TraceHook | None = None,
    check: Callable[[Configuration], None] | None = None,
) -> Configuration:
    """Run the reveal loop to completion and return the final configuration.

    ``policy`` is ``"fifo"`` (ready multibidders served in the order they
    became ready, starting from index order), ``"reverse"`` (most recently
    ready first), or a callable picking one bidder from the ready list.
    ``check`` is invoked on the configuration after every reveal.
    """
    conf = Configuration(source, trace)
    n = len(source.multibidders)
    if policy in ("fifo", "reverse"):
        queue = [t for t in range(n) if conf.is_ready(t)]
        head = 0
        while head < len(queue):
            if policy == "fifo":
                t = queue[head]
                head += 1
            else:
                t = queue.pop()
            freed = conf.reveal(source.multibidders[t].bidders[conf.reveal_count[t]])
            if check is not None:
                check(conf)
            if freed is not None and conf.is_ready(freed):
                queue.append(freed)
        return conf
    if not callable(policy):
        raise ValueError(f"unknown reveal policy {policy!r}")
    while True:
        ready = conf.ready_set()
        if not ready:
            return conf
        conf.reveal(policy(ready))
        if check is not None:
            check(conf)


def to_uap(source: Iuap, policy: str | Policy = "fifo") -> Uap:
    return run_reveals(source, policy).revealed


def revealed_ids(conf: Configuration) -> frozenset[int]:
    return frozenset(conf.engine.bidders)


def iuap_of(multibidders: Iterable[Multibidder], items: Iterable[Item]) -> Iuap:
    return Iuap(tuple(multibidders), frozenset(items))
