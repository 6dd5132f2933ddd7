"""Families of admissible messages, one space per officer.

Four families are supported.  Complete spaces hold every strict total
order.  Zonal spaces rank states fully inside each zone of a partition
and say nothing across zones.  Ranked-zonal spaces additionally rank the
zones themselves: a message places the top of a higher zone above the
bottom of every lower zone, and nothing else across zones.  Explicit
spaces are literal message lists.

Enumeration is deterministic: zones in partition order, per-zone orders
in lexicographic permutation order, zone rankings varying last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterable, Iterator, Sequence

from .relations import (
    Message,
    PreferenceOrder,
    StateId,
    is_truthful,
    validate_message,
)

DEFAULT_STATE_CAP = 6


class SpaceError(ValueError):
    """Malformed partitions, messages outside a family, or oversized sweeps."""


class EnumerationCapError(SpaceError):
    def __init__(self, states: int, cap: int, count: int):
        self.states = states
        self.cap = cap
        self.count = count
        super().__init__(
            f"enumeration over {states} states exceeds the cap of {cap}; "
            f"{count} messages would be generated (raise max_states to force)"
        )


@dataclass(frozen=True)
class Partition:
    """An ordered partition of the state universe into zones."""

    zones: tuple[frozenset[StateId], ...]

    def __post_init__(self) -> None:
        seen: set[StateId] = set()
        for zone in self.zones:
            if not zone:
                raise SpaceError("partition contains an empty zone")
            overlap = seen & zone
            if overlap:
                raise SpaceError(f"state {sorted(overlap)[0]!r} appears in two zones")
            seen |= zone

    @property
    def universe(self) -> frozenset[StateId]:
        return frozenset(s for zone in self.zones for s in zone)

    def zone_of(self, state: StateId) -> int:
        for k, zone in enumerate(self.zones):
            if state in zone:
                return k
        raise SpaceError(f"state {state!r} is not in any zone")

    @classmethod
    def of(cls, zone_lists: Iterable[Iterable[StateId]]) -> Partition:
        return cls(tuple(frozenset(z) for z in zone_lists))


@dataclass(frozen=True)
class ZoneRanking:
    """Zone indices of a partition, best zone first."""

    order: tuple[int, ...]


def zonal_message(partition: Partition, per_zone: Sequence[Sequence[StateId]]) -> Message:
    """Build the message that fully orders each zone and nothing across zones."""
    if len(per_zone) != len(partition.zones):
        raise SpaceError("one ordering per zone is required")
    pairs: set[tuple[StateId, StateId]] = set()
    for zone, order in zip(partition.zones, per_zone):
        if frozenset(order) != zone or len(order) != len(zone):
            raise SpaceError(f"ordering {list(order)} does not cover its zone exactly")
        for i, a in enumerate(order):
            for b in order[i + 1 :]:
                pairs.add((a, b))
    return validate_message(pairs, partition.universe)


def ranked_zonal_message(
    partition: Partition,
    per_zone: Sequence[Sequence[StateId]],
    zone_ranking: ZoneRanking,
) -> Message:
    """A zonal message plus one cross pair for every ordered zone pair.

    For zones z above z' in the ranking, the pair (top of z, bottom of z')
    is reported; no other cross-zone pair is.
    """
    base = zonal_message(partition, per_zone)
    if sorted(zone_ranking.order) != list(range(len(partition.zones))):
        raise SpaceError("zone ranking must be a permutation of the zone indices")
    pairs = set(base.pairs)
    order = zone_ranking.order
    for i, hi in enumerate(order):
        for lo in order[i + 1 :]:
            top = per_zone[hi][0]
            bottom = per_zone[lo][-1]
            pairs.add((top, bottom))
    return validate_message(pairs, partition.universe)


def _zone_perms(zone: frozenset[StateId]) -> list[tuple[StateId, ...]]:
    return list(permutations(sorted(zone)))


class MessageSpace:
    """Base interface: a finite set of admissible messages for one officer."""

    states: frozenset[StateId]

    def count(self) -> int:
        raise NotImplementedError

    def _generate(self) -> Iterator[Message]:
        raise NotImplementedError

    def enumerate(self, max_states: int = DEFAULT_STATE_CAP) -> list[Message]:
        if len(self.states) > max_states:
            raise EnumerationCapError(len(self.states), max_states, self.count())
        return list(self._generate())

    def contains(self, message: Message) -> bool:
        if message.universe != self.states:
            return False
        return any(message.pairs == m.pairs for m in self._generate())


@dataclass(frozen=True)
class CompleteSpace(MessageSpace):
    """Every strict total order over the states."""

    states: frozenset[StateId]

    def count(self) -> int:
        return math.factorial(len(self.states))

    def _generate(self) -> Iterator[Message]:
        for ranking in permutations(sorted(self.states)):
            yield complete_order_message(ranking)

    def contains(self, message: Message) -> bool:
        if message.universe != self.states:
            return False
        n = len(self.states)
        return len(message.pairs) == n * (n - 1) // 2 and _is_total(message)


@dataclass(frozen=True)
class ZonalSpace(MessageSpace):
    """Full orders inside each zone, silence across zones."""

    partition: Partition

    @property
    def states(self) -> frozenset[StateId]:  # type: ignore[override]
        return self.partition.universe

    def count(self) -> int:
        return math.prod(math.factorial(len(z)) for z in self.partition.zones)

    def _generate(self) -> Iterator[Message]:
        for combo in product(*(_zone_perms(z) for z in self.partition.zones)):
            yield zonal_message(self.partition, combo)

    def contains(self, message: Message) -> bool:
        if message.universe != self.states:
            return False
        try:
            zone_orders_of(message, self.partition)
        except SpaceError:
            return False
        expect = sum(len(z) * (len(z) - 1) // 2 for z in self.partition.zones)
        return len(message.pairs) == expect


@dataclass(frozen=True)
class RankedZonalSpace(MessageSpace):
    """Zonal orders plus a complete ranking of the zones themselves."""

    partition: Partition

    @property
    def states(self) -> frozenset[StateId]:  # type: ignore[override]
        return self.partition.universe

    def count(self) -> int:
        zones = self.partition.zones
        return math.prod(math.factorial(len(z)) for z in zones) * math.factorial(len(zones))

    def _generate(self) -> Iterator[Message]:
        zones = self.partition.zones
        for combo in product(*(_zone_perms(z) for z in zones)):
            for ranking in permutations(range(len(zones))):
                yield ranked_zonal_message(self.partition, combo, ZoneRanking(ranking))

    def contains(self, message: Message) -> bool:
        if message.universe != self.states:
            return False
        try:
            orders = zone_orders_of(message, self.partition)
            ranking = zone_ranking_of(message, self.partition)
        except SpaceError:
            return False
        rebuilt = ranked_zonal_message(self.partition, orders, ranking)
        return rebuilt.pairs == message.pairs


@dataclass(frozen=True)
class ExplicitSpace(MessageSpace):
    """A literal list of admissible messages."""

    states: frozenset[StateId]
    messages: tuple[Message, ...]

    def __post_init__(self) -> None:
        for m in self.messages:
            if m.universe != self.states:
                raise SpaceError("explicit message ranges over a different universe")

    def count(self) -> int:
        return len(self.messages)

    def _generate(self) -> Iterator[Message]:
        yield from self.messages


def enumerate_messages(
    space: MessageSpace, max_states: int = DEFAULT_STATE_CAP
) -> list[Message]:
    """All messages of the space in the space's deterministic order."""
    return space.enumerate(max_states=max_states)


def truthful_messages(
    space: MessageSpace,
    preference: PreferenceOrder,
    max_states: int = DEFAULT_STATE_CAP,
) -> list[Message]:
    """Messages of the space whose every pair agrees with the preference."""
    return [m for m in space.enumerate(max_states=max_states) if is_truthful(m, preference)]


def _is_total(message: Message) -> bool:
    states = sorted(message.universe)
    for i, a in enumerate(states):
        for b in states[i + 1 :]:
            if (a, b) not in message.pairs and (b, a) not in message.pairs:
                return False
    return True


def zone_orders_of(
    message: Message, partition: Partition
) -> tuple[tuple[StateId, ...], ...]:
    """Recover each zone's total order from a (ranked-)zonal message."""
    orders = []
    for zone in partition.zones:
        within = {(a, b) for (a, b) in message.pairs if a in zone and b in zone}
        need = len(zone) * (len(zone) - 1) // 2
        if len(within) != need:
            raise SpaceError(f"zone {sorted(zone)} is not totally ordered by the message")
        ranked = sorted(zone, key=lambda s: -sum(1 for p in within if p[0] == s))
        for i, a in enumerate(ranked):
            for b in ranked[i + 1 :]:
                if (a, b) not in within:
                    raise SpaceError(f"zone {sorted(zone)} is not totally ordered by the message")
        orders.append(tuple(ranked))
    return tuple(orders)


def zone_ranking_of(message: Message, partition: Partition) -> ZoneRanking:
    """Recover the zone ranking implied by a ranked-zonal message's cross pairs."""
    orders = zone_orders_of(message, partition)
    zones = range(len(partition.zones))
    above: dict[int, set[int]] = {z: set() for z in zones}
    cross = {
        (a, b)
        for (a, b) in message.pairs
        if partition.zone_of(a) != partition.zone_of(b)
    }
    for z in zones:
        for w in zones:
            if z == w:
                continue
            pair = (orders[z][0], orders[w][-1])
            if pair in cross:
                above[z].add(w)
                cross.discard(pair)
    if cross:
        raise SpaceError(f"stray cross-zone pair {sorted(cross)[0]} in message")
    ranked = sorted(zones, key=lambda z: -len(above[z]))
    for i, z in enumerate(ranked):
        if len(above[z]) != len(partition.zones) - 1 - i:
            raise SpaceError("cross-zone pairs do not encode a complete zone ranking")
    return ZoneRanking(tuple(ranked))


def check_richness(
    space: MessageSpace, max_states: int = DEFAULT_STATE_CAP
) -> tuple[bool, tuple[Message, tuple[StateId, StateId]] | None]:
    """Whether every covering pair of every message can be reversed in place.

    A pair (a, b) of a message m is covering when no state sits strictly
    between a and b in m.  The space is rich when, for each such pair, it
    also holds the message identical to m except that b is placed above a.
    The witness, when present, is the first irreversible covering pair;
    for ranked-zonal spaces cross-zone pairs are scanned first, since
    those are the structurally irreversible ones.
    """
    all_messages = space.enumerate(max_states=max_states)
    pair_sets = {m.pairs for m in all_messages}
    partition = getattr(space, "partition", None)

    def scan_order(m: Message) -> list[tuple[StateId, StateId]]:
        ordered = sorted(m.pairs)
        if isinstance(space, RankedZonalSpace) and partition is not None:
            cross = [p for p in ordered if partition.zone_of(p[0]) != partition.zone_of(p[1])]
            within = [p for p in ordered if p not in cross]
            return cross + within
        return ordered

    for m in all_messages:
        for a, b in scan_order(m):
            between = any((a, y) in m.pairs and (y, b) in m.pairs for y in m.universe)
            if between:
                continue
            reversed_pairs = (m.pairs - {(a, b)}) | {(b, a)}
            if reversed_pairs not in pair_sets:
                return False, (m, (a, b))
    return True, None


def complete_order_message(ranking: Sequence[StateId]) -> Message:
    pairs = set()
    for i, a in enumerate(ranking):
        for b in ranking[i + 1 :]:
            pairs.add((a, b))
    return Message(frozenset(ranking), frozenset(pairs))


def induced_partition(bounds: "UpperBoundSystem", officer_type: str, states: Iterable[StateId]) -> Partition:
    """Group states by the set of bounds covering them for the given type.

    Zones are ordered by their lexicographically smallest member, which
    fixes zone indices deterministically.
    """
    from .constraints import signature  # local import to avoid a cycle

    groups: dict[frozenset, set[StateId]] = {}
    for s in sorted(set(states)):
        groups.setdefault(signature(bounds, s, officer_type), set()).add(s)
    zones = sorted(groups.values(), key=lambda z: min(z))
    return Partition(tuple(frozenset(z) for z in zones))


def modular_induced_space(
    bounds: "UpperBoundSystem", officer_type: str, states: Iterable[StateId]
) -> ZonalSpace:
    """The zonal space over the partition induced by an upper-bound system."""
    return ZonalSpace(induced_partition(bounds, officer_type, states))


def truthful_zonal_message(partition: Partition, preference: PreferenceOrder) -> Message:
    """The unique zonal message agreeing with a complete preference."""
    per_zone = tuple(preference.restrict(zone) for zone in partition.zones)
    return zonal_message(partition, per_zone)
