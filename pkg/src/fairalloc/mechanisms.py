"""Sequential priority allocation engines.

Every engine walks the officers in priority order, hands each one a
state, and returns the allocation together with a full trace: the states
still open at the step, the maximal states of the officer's message, the
zone picked (where zones apply), and the quota bookkeeping used to pick
it.  Audits replay traces; they never need to re-run an engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .constraints import (
    Allocation,
    OfficerId,
    OfficerType,
    UpperBound,
    UpperBoundSystem,
)
from .relations import (
    Message,
    PreferenceOrder,
    StateId,
    maximal_elements,
)
from .spaces import (
    Partition,
    RankedZonalSpace,
    ZonalSpace,
    induced_partition,
    zone_orders_of,
    zone_ranking_of,
)


class MechanismError(ValueError):
    """An engine was driven outside its contract."""


class MessageProfileError(MechanismError):
    pass


class NonMaximalChoiceError(MechanismError):
    def __init__(self, state: StateId):
        self.state = state
        super().__init__(f"policy chose {state!r}, which is not maximal for the officer")


class EmptyZoneSelectionError(MechanismError):
    def __init__(self, zone: int):
        self.zone = zone
        super().__init__(f"selector chose zone {zone}, which has no available state")


class SelectorConditionError(MechanismError):
    def __init__(self, zone: int, condition: int):
        self.zone = zone
        self.condition = condition
        super().__init__(
            f"selector chose zone {zone} in violation of ranked-selection condition {condition}"
        )


class NoAdmissibleZoneError(MechanismError):
    def __init__(self, officer: OfficerId):
        self.officer = officer
        super().__init__(
            f"no unflagged zone with spare capacity remains for officer {officer!r}; "
            "the bound system is not sequentially solvent for this arrival order"
        )


class EmptyMenuError(MechanismError):
    def __init__(self, officer: OfficerId):
        self.officer = officer
        super().__init__(
            f"no state is both under capacity and clear of binding bounds for "
            f"officer {officer!r}; the bound system is not sequentially solvent"
        )


class ProviderOrderError(MechanismError):
    def __init__(self, officer: OfficerId, ranking: Sequence[StateId]):
        self.officer = officer
        self.ranking = tuple(ranking)
        super().__init__(
            f"provider returned {list(ranking)} for officer {officer!r}, "
            "which is not a strict total order of the presented menu"
        )


@dataclass(frozen=True)
class Officer:
    id: OfficerId
    type: OfficerType = "t"


@dataclass(frozen=True)
class Problem:
    """Officers in priority order plus capacitated states."""

    officers: tuple[Officer, ...]
    states: tuple[tuple[StateId, int], ...]

    def __post_init__(self) -> None:
        ids = [o.id for o in self.officers]
        if len(set(ids)) != len(ids):
            raise MechanismError("officer ids repeat")
        names = [s for s, _ in self.states]
        if len(set(names)) != len(names):
            raise MechanismError("state ids repeat")
        for s, q in self.states:
            if q < 1:
                raise MechanismError(f"state {s!r} must have positive capacity")
        if sum(q for _, q in self.states) < len(self.officers):
            raise MechanismError("total capacity is below the officer count")

    @property
    def universe(self) -> frozenset[StateId]:
        return frozenset(s for s, _ in self.states)

    def capacities(self) -> dict[StateId, int]:
        return dict(self.states)

    def state_order(self) -> tuple[StateId, ...]:
        return tuple(s for s, _ in self.states)

    def types(self) -> dict[OfficerId, OfficerType]:
        return {o.id: o.type for o in self.officers}

    @classmethod
    def of(
        cls,
        officers: Iterable[tuple[OfficerId, OfficerType] | Officer],
        states: Iterable[tuple[StateId, int]],
    ) -> Problem:
        offs = tuple(
            o if isinstance(o, Officer) else Officer(o[0], o[1]) for o in officers
        )
        return cls(offs, tuple(states))


@dataclass(frozen=True)
class StepRecord:
    """What one officer faced and received."""

    officer: OfficerId
    available: tuple[StateId, ...]
    maximal: tuple[StateId, ...]
    assigned: StateId
    zone: tuple[StateId, ...] | None = None
    menu: tuple[StateId, ...] | None = None
    excluded: tuple[StateId, ...] | None = None
    flags: tuple[tuple[OfficerType, int], ...] | None = None
    binding: tuple[str, ...] | None = None
    message: Message | None = None


@dataclass(frozen=True)
class RunTrace:
    steps: tuple[StepRecord, ...]

    def allocation(self) -> Allocation:
        return Allocation(tuple((st.officer, st.assigned) for st in self.steps))


class _Occupancy:
    def __init__(self, problem: Problem):
        self.capacities = problem.capacities()
        self.used: dict[StateId, int] = {s: 0 for s in self.capacities}

    def available(self) -> frozenset[StateId]:
        return frozenset(s for s, q in self.capacities.items() if self.used[s] < q)

    def take(self, state: StateId) -> None:
        self.used[state] += 1
        if self.used[state] > self.capacities[state]:  # pragma: no cover
            raise MechanismError(f"state {state!r} over capacity")

    def spare(self, state: StateId) -> int:
        return self.capacities[state] - self.used[state]


def _check_profile(problem: Problem, messages: Sequence[Message]) -> None:
    if len(messages) != len(problem.officers):
        raise MessageProfileError("one message per officer is required")
    for m in messages:
        if m.universe != problem.universe:
            raise MessageProfileError("message universe differs from the state set")


# ---------------------------------------------------------------------------
# Queue mechanisms over arbitrary messages


@dataclass(frozen=True)
class FixedStateOrder:
    """Break maximal-set ties by a fixed ordering of the states."""

    order: tuple[StateId, ...]

    def choose(
        self,
        step: int,
        officer: Officer,
        available: frozenset[StateId],
        maximal: frozenset[StateId],
        profile: tuple[Message, ...],
    ) -> StateId:
        for s in self.order:
            if s in maximal:
                return s
        raise MechanismError("state order does not cover the maximal set")


@dataclass(frozen=True)
class TablePolicy:
    """Follow a fixed outcome table keyed by the full message profile."""

    table: Mapping[tuple[Message, ...], Allocation]

    def choose(
        self,
        step: int,
        officer: Officer,
        available: frozenset[StateId],
        maximal: frozenset[StateId],
        profile: tuple[Message, ...],
    ) -> StateId:
        try:
            return self.table[profile][officer.id]
        except KeyError as exc:
            raise MechanismError("outcome table does not cover this profile") from exc


def m_queue_run(
    problem: Problem,
    messages: Sequence[Message],
    policy=None,
) -> tuple[Allocation, RunTrace]:
    """Each officer takes a maximal state of their message among those open.

    A state leaves the queue exactly when its occupancy reaches capacity.
    The policy resolves ties inside the maximal set and must stay inside
    it; the default follows the problem's state order.
    """
    _check_profile(problem, messages)
    if policy is None:
        policy = FixedStateOrder(problem.state_order())
    occ = _Occupancy(problem)
    profile = tuple(messages)
    steps = []
    for k, officer in enumerate(problem.officers):
        available = occ.available()
        maximal = maximal_elements(available, messages[k])
        chosen = policy.choose(k, officer, available, maximal, profile)
        if chosen not in maximal:
            raise NonMaximalChoiceError(chosen)
        occ.take(chosen)
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal)),
                assigned=chosen,
            )
        )
    return Allocation(tuple((s.officer, s.assigned) for s in steps)), RunTrace(tuple(steps))


def serial_dictatorship(
    problem: Problem, preferences: Sequence[PreferenceOrder]
) -> Allocation:
    """Officers pick their favourite open state, in priority order."""
    if len(preferences) != len(problem.officers):
        raise MechanismError("one preference order per officer is required")
    occ = _Occupancy(problem)
    items = []
    for officer, pref in zip(problem.officers, preferences):
        if pref.universe != problem.universe:
            raise MechanismError("preference universe differs from the state set")
        pick = pref.top(occ.available())
        occ.take(pick)
        items.append((officer.id, pick))
    return Allocation(tuple(items))


# ---------------------------------------------------------------------------
# Zone selection


@dataclass(frozen=True)
class ZoneOverride:
    """A selector table row: when the step matches, pick this zone."""

    zone: int
    available: frozenset[StateId] | None = None
    messages: tuple[tuple[int, frozenset[tuple[StateId, StateId]]], ...] = ()

    def matches(
        self, available: frozenset[StateId], profile: tuple[Message, ...]
    ) -> bool:
        if self.available is not None and self.available != available:
            return False
        for index, pairs in self.messages:
            if index >= len(profile) or profile[index].pairs != pairs:
                return False
        return True


@dataclass(frozen=True)
class ZoneSelector:
    """Zone choice rule: overrides first, then a named default rule.

    Rules: "first-intersecting" takes the earliest zone of the partition
    that still has an open state; "ranked-first" takes the best zone of
    the officer's own reported zone ranking that still has an open state.
    """

    rule: str = "first-intersecting"
    overrides: tuple[ZoneOverride, ...] = ()

    def choose(
        self,
        partition: Partition,
        available: frozenset[StateId],
        profile: tuple[Message, ...],
        own: Message,
    ) -> int:
        for ov in self.overrides:
            if ov.matches(available, profile):
                return ov.zone
        if self.rule == "first-intersecting":
            for k, zone in enumerate(partition.zones):
                if zone & available:
                    return k
            raise MechanismError("no zone intersects the available set")
        if self.rule == "ranked-first":
            ranking = zone_ranking_of(own, partition)
            for k in ranking.order:
                if partition.zones[k] & available:
                    return k
            raise MechanismError("no zone intersects the available set")
        raise MechanismError(f"unknown selector rule {self.rule!r}")


def partitioned_priority_run(
    problem: Problem,
    messages: Sequence[Message],
    partitions: Sequence[Partition],
    selectors: Sequence[ZoneSelector] | None = None,
) -> tuple[Allocation, RunTrace]:
    """Zonal messages: a selector names a zone, the officer takes its best
    open state under their own report."""
    _check_profile(problem, messages)
    if selectors is None:
        selectors = [ZoneSelector()] * len(problem.officers)
    occ = _Occupancy(problem)
    profile = tuple(messages)
    steps = []
    for k, officer in enumerate(problem.officers):
        partition, m = partitions[k], messages[k]
        if not ZonalSpace(partition).contains(m):
            raise MessageProfileError(
                f"message of officer {officer.id!r} is not zonal over its partition"
            )
        available = occ.available()
        maximal = maximal_elements(available, m)
        zone_idx = selectors[k].choose(partition, available, profile, m)
        inside = partition.zones[zone_idx] & available
        if not inside:
            raise EmptyZoneSelectionError(zone_idx)
        pick_set = maximal_elements(inside, m)
        assert len(pick_set) == 1, "a totally ordered zone has one best open state"
        pick = next(iter(pick_set))
        occ.take(pick)
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal)),
                assigned=pick,
                zone=tuple(sorted(partition.zones[zone_idx])),
            )
        )
    return Allocation(tuple((s.officer, s.assigned) for s in steps)), RunTrace(tuple(steps))


def ranked_partitioned_priority_run(
    problem: Problem,
    messages: Sequence[Message],
    partitions: Sequence[Partition],
    selectors: Sequence[ZoneSelector] | None = None,
) -> tuple[Allocation, RunTrace]:
    """Ranked-zonal messages: like the partitioned run, but the selector
    must honour the officer's reported zone ranking.

    Two conditions are enforced on every zone choice: the zone must hold
    an open state, and it must not be reduced to its reported bottom
    state while a better-ranked zone still shows the top state of that
    zone open.  Within the chosen zone the officer receives the unique
    state that is maximal over the whole available set.
    """
    _check_profile(problem, messages)
    if selectors is None:
        selectors = [ZoneSelector(rule="ranked-first")] * len(problem.officers)
    occ = _Occupancy(problem)
    profile = tuple(messages)
    steps = []
    for k, officer in enumerate(problem.officers):
        partition, m = partitions[k], messages[k]
        if not RankedZonalSpace(partition).contains(m):
            raise MessageProfileError(
                f"message of officer {officer.id!r} is not ranked-zonal over its partition"
            )
        orders = zone_orders_of(m, partition)
        ranking = zone_ranking_of(m, partition)
        available = occ.available()
        maximal = maximal_elements(available, m)
        zone_idx = selectors[k].choose(partition, available, profile, m)
        inside = partition.zones[zone_idx] & available
        if not inside:
            raise SelectorConditionError(zone_idx, condition=1)
        bottom = orders[zone_idx][-1]
        if inside == {bottom}:
            place = ranking.order.index(zone_idx)
            for better in ranking.order[:place]:
                if orders[better][0] in available:
                    raise SelectorConditionError(zone_idx, condition=2)
        pick_set = maximal & inside
        assert len(pick_set) == 1, "ranked selection pins a unique state"
        pick = next(iter(pick_set))
        occ.take(pick)
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal)),
                assigned=pick,
                zone=tuple(sorted(partition.zones[zone_idx])),
            )
        )
    return Allocation(tuple((s.officer, s.assigned) for s in steps)), RunTrace(tuple(steps))


# ---------------------------------------------------------------------------
# Modular mechanisms


class _QuotaBook:
    """Bound counts plus the per-(type, zone) flags they induce."""

    def __init__(
        self,
        bounds: UpperBoundSystem,
        partitions: Mapping[OfficerType, Partition],
    ):
        self.bounds = bounds
        self.partitions = partitions
        self.counts: dict[UpperBound, int] = {h: 0 for h in bounds}

    def record(self, state: StateId, officer_type: OfficerType) -> None:
        for h in self.bounds:
            if h.covers(state, officer_type):
                self.counts[h] += 1

    def flags(self) -> frozenset[tuple[OfficerType, int]]:
        flagged = set()
        for h in self.bounds:
            if self.counts[h] >= h.ceiling:
                for t in h.types:
                    partition = self.partitions.get(t)
                    if partition is None:
                        continue
                    for idx, zone in enumerate(partition.zones):
                        if zone & h.states:
                            flagged.add((t, idx))
        return frozenset(flagged)

    def binding(self, officer_type: OfficerType) -> tuple[UpperBound, ...]:
        return tuple(
            h
            for h in self.bounds
            if officer_type in h.types and self.counts[h] >= h.ceiling
        )


def modular_priority_run(
    problem: Problem,
    bounds: UpperBoundSystem,
    messages: Sequence[Message],
    exogenous: Mapping[OfficerId, tuple[int, ...]] | None = None,
) -> tuple[Allocation, RunTrace]:
    """Static modular mechanism over bound-induced zones.

    Each officer walks their exogenous zone ranking and enters the first
    zone that is unflagged for their type and still has an open state,
    taking the best open state there under their own zonal report.  A
    flag appears on every zone touching a bound's states the moment that
    bound's count reaches its ceiling.
    """
    _check_profile(problem, messages)
    partitions = {
        t: induced_partition(bounds, t, problem.universe)
        for t in {o.type for o in problem.officers}
    }
    book = _QuotaBook(bounds, partitions)
    occ = _Occupancy(problem)
    steps = []
    for k, officer in enumerate(problem.officers):
        partition, m = partitions[officer.type], messages[k]
        if not ZonalSpace(partition).contains(m):
            raise MessageProfileError(
                f"message of officer {officer.id!r} is not zonal over the "
                "partition induced for its type"
            )
        order = _exogenous_order(exogenous, officer, partition)
        available = occ.available()
        flags = book.flags()
        zone_idx = None
        for idx in order:
            if (officer.type, idx) in flags:
                continue
            if partition.zones[idx] & available:
                zone_idx = idx
                break
        if zone_idx is None:
            raise NoAdmissibleZoneError(officer.id)
        inside = partition.zones[zone_idx] & available
        pick_set = maximal_elements(inside, m)
        assert len(pick_set) == 1
        pick = next(iter(pick_set))
        occ.take(pick)
        book.record(pick, officer.type)
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal_elements(available, m))),
                assigned=pick,
                zone=tuple(sorted(partition.zones[zone_idx])),
                flags=tuple(sorted(flags)),
            )
        )
    return Allocation(tuple((s.officer, s.assigned) for s in steps)), RunTrace(tuple(steps))


def _exogenous_order(
    exogenous: Mapping[OfficerId, tuple[int, ...]] | None,
    officer: Officer,
    partition: Partition,
) -> tuple[int, ...]:
    if exogenous is None or officer.id not in exogenous:
        return tuple(range(len(partition.zones)))
    order = tuple(exogenous[officer.id])
    if sorted(order) != list(range(len(partition.zones))):
        raise MechanismError(
            f"exogenous zone ranking for officer {officer.id!r} must be a "
            "permutation of the induced zone indices"
        )
    return order


RankingProvider = Callable[[Officer, tuple[StateId, ...]], Sequence[StateId]]


def dynamic_modular_priority_run(
    problem: Problem,
    bounds: UpperBoundSystem,
    provider: RankingProvider,
) -> tuple[Allocation, RunTrace]:
    """Dynamic modular mechanism: menus shrink as bounds become binding.

    Each officer is shown the states that are under capacity and clear of
    every bound currently binding for their type, reports a strict order
    over that menu, and receives its top.  The excluded states and the
    binding bounds are recorded in the trace for audit.
    """
    occ = _Occupancy(problem)
    book = _QuotaBook(bounds, {})
    steps = []
    for officer in problem.officers:
        available = occ.available()
        binding = book.binding(officer.type)
        blocked = frozenset(s for h in binding for s in h.states)
        menu = tuple(sorted(available - blocked))
        if not menu:
            raise EmptyMenuError(officer.id)
        excluded = tuple(sorted(problem.universe - frozenset(menu)))
        ranking = tuple(provider(Officer(officer.id, officer.type), menu))
        if sorted(ranking) != sorted(menu):
            raise ProviderOrderError(officer.id, ranking)
        pick = ranking[0]
        pairs = frozenset(
            (ranking[i], ranking[j])
            for i in range(len(ranking))
            for j in range(i + 1, len(ranking))
        )
        message = Message(problem.universe, pairs)
        occ.take(pick)
        book.record(pick, officer.type)
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal_elements(available, message))),
                assigned=pick,
                menu=menu,
                excluded=excluded,
                binding=tuple(h.describe() for h in binding),
                message=message,
            )
        )
    return Allocation(tuple((s.officer, s.assigned) for s in steps)), RunTrace(tuple(steps))


def truthful_provider(
    preferences: Mapping[OfficerId, PreferenceOrder]
) -> RankingProvider:
    """A provider that ranks every menu by the officer's true preference."""

    def provide(officer: Officer, menu: tuple[StateId, ...]) -> Sequence[StateId]:
        return preferences[officer.id].restrict(menu)

    return provide


def scripted_provider(
    rankings: Mapping[OfficerId, Sequence[StateId]]
) -> RankingProvider:
    """A provider that filters a pre-written ranking down to each menu."""

    def provide(officer: Officer, menu: tuple[StateId, ...]) -> Sequence[StateId]:
        script = [s for s in rankings.get(officer.id, ()) if s in menu]
        return tuple(script)

    return provide
