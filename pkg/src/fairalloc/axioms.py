"""Exhaustive oracles for fairness, efficiency and incentive properties.

Every check here either sweeps its whole quantifier space or refuses to
run: when the planned work exceeds the budget a CapExceededError carries
the count, and the caller decides what to do with an inconclusive
verdict.  Nothing is sampled silently.  Checks return None on success or
a witness object holding enough data to replay the violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Callable, Iterator, Mapping, Sequence

from .constraints import (
    Allocation,
    ConstraintError,
    OfficerId,
    UpperBoundSystem,
    check_feasible,
    respects_bounds,
)
from .mechanisms import (
    Problem,
    RunTrace,
    StepRecord,
    dynamic_modular_priority_run,
    truthful_provider,
)
from .relations import (
    Message,
    PreferenceOrder,
    StateId,
    comparable,
    maximal_elements,
)
from .spaces import DEFAULT_STATE_CAP, MessageSpace

DEFAULT_SWEEP_BUDGET = 2_000_000
DEFAULT_ALLOCATION_CAP = 500_000


class CapExceededError(RuntimeError):
    """The oracle refused to start a sweep larger than its budget."""

    def __init__(self, count: int, budget: int):
        self.count = count
        self.budget = budget
        super().__init__(
            f"the sweep would evaluate {count} cases, over the budget of {budget}"
        )


def _plan(count: int, budget: int) -> None:
    if count > budget:
        raise CapExceededError(count, budget)


# ---------------------------------------------------------------------------
# Witnesses


@dataclass(frozen=True)
class EnvyWitness:
    """A higher-priority officer visibly prefers a lower-priority assignment."""

    officer: OfficerId
    envied: OfficerId
    officer_state: StateId
    envied_state: StateId


@dataclass(frozen=True)
class WasteWitness:
    """An officer visibly prefers a state left under capacity."""

    officer: OfficerId
    state: StateId
    officer_state: StateId


@dataclass(frozen=True)
class DominationWitness:
    """Another allocation makes every mover strictly better off."""

    dominating: Allocation
    movers: tuple[OfficerId, ...]


@dataclass(frozen=True)
class ManipulationWitness:
    officer: OfficerId
    preference: PreferenceOrder
    truthful: Message
    deviation: Message
    opponents: tuple[Message, ...]
    truthful_state: StateId
    deviation_state: StateId


@dataclass(frozen=True)
class ExpressivenessWitness:
    """A deviation moved the officer to a state their report cannot compare."""

    officer: OfficerId
    profile: tuple[Message, ...]
    deviation: Message
    original_state: StateId
    deviation_state: StateId


@dataclass(frozen=True)
class AvailabilityWitness:
    """A deviation reached a state filled by higher-priority officers."""

    officer: OfficerId
    profile: tuple[Message, ...]
    deviation: Message
    state: StateId
    preference: PreferenceOrder | None = None


@dataclass(frozen=True)
class CoherenceWitness:
    """A deviation's outcome is not beaten by the original under the report."""

    officer: OfficerId
    profile: tuple[Message, ...]
    deviation: Message
    original_state: StateId
    deviation_state: StateId


@dataclass(frozen=True)
class StepDominanceWitness:
    officer: OfficerId
    menu: tuple[StateId, ...]
    truthful_state: StateId
    better_state: StateId
    ranking: tuple[StateId, ...]


# ---------------------------------------------------------------------------
# Mechanisms under test


@dataclass
class Mechanism:
    """A message-space profile plus a total outcome function.

    The outcome function may be an engine closure or a table lookup; runs
    are cached so exhaustive sweeps pay each profile once.
    """

    problem: Problem
    spaces: tuple[MessageSpace, ...]
    outcome: Callable[[tuple[Message, ...]], Allocation]
    name: str = ""
    max_states: int = DEFAULT_STATE_CAP
    _cache: dict[tuple[Message, ...], Allocation] = field(
        default_factory=dict, repr=False
    )
    _lists: tuple[tuple[Message, ...], ...] | None = field(default=None, repr=False)

    def run(self, profile: tuple[Message, ...]) -> Allocation:
        hit = self._cache.get(profile)
        if hit is None:
            hit = self.outcome(profile)
            check_feasible(hit, self.problem.capacities())
            self._cache[profile] = hit
        return hit

    def message_lists(self) -> tuple[tuple[Message, ...], ...]:
        if self._lists is None:
            self._lists = tuple(
                tuple(space.enumerate(max_states=self.max_states))
                for space in self.spaces
            )
        return self._lists

    def profile_count(self) -> int:
        return math.prod(len(ms) for ms in self.message_lists())

    def profiles(self) -> Iterator[tuple[Message, ...]]:
        yield from product(*self.message_lists())

    @classmethod
    def from_table(
        cls,
        problem: Problem,
        spaces: Sequence[MessageSpace],
        table: Mapping[tuple[Message, ...], Allocation],
        name: str = "",
    ) -> Mechanism:
        def lookup(profile: tuple[Message, ...]) -> Allocation:
            try:
                return table[profile]
            except KeyError as exc:
                raise ConstraintError("outcome table does not cover a profile") from exc

        return cls(problem, tuple(spaces), lookup, name=name)


# ---------------------------------------------------------------------------
# Visible fairness


def visibly_unfair_witness(
    allocation: Allocation,
    messages: Sequence[Message],
    problem: Problem,
) -> EnvyWitness | WasteWitness | None:
    """First visible complaint, scanning officers in priority order.

    An officer complains by envy when a lower-priority officer holds a
    state their own report places above their assignment, and by waste
    when such a state is left under capacity.
    """
    check_feasible(allocation, problem.capacities())
    officers = problem.officers
    occupancy = allocation.occupancy()
    capacities = problem.capacities()
    for i, officer in enumerate(officers):
        mine = allocation[officer.id]
        m = messages[i]
        for later in officers[i + 1 :]:
            theirs = allocation[later.id]
            if theirs != mine and m.above(theirs, mine):
                return EnvyWitness(officer.id, later.id, mine, theirs)
        for state in sorted(problem.universe):
            if state == mine:
                continue
            if occupancy.get(state, 0) < capacities[state] and m.above(state, mine):
                return WasteWitness(officer.id, state, mine)
    return None


def reconstruct_m_queue(
    allocation: Allocation,
    messages: Sequence[Message],
    problem: Problem,
) -> RunTrace | None:
    """Recover a queue trace that produces the allocation, if one exists.

    Walks the officers in priority order against the shrinking state
    pool; the allocation is reachable exactly when every officer's state
    is maximal for their message among the states still open.
    """
    check_feasible(allocation, problem.capacities())
    capacities = problem.capacities()
    used = {s: 0 for s in capacities}
    steps = []
    for k, officer in enumerate(problem.officers):
        available = frozenset(s for s in capacities if used[s] < capacities[s])
        target = allocation[officer.id]
        if target not in available:
            return None
        maximal = maximal_elements(available, messages[k])
        if target not in maximal:
            return None
        used[target] += 1
        steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal)),
                assigned=target,
            )
        )
    return RunTrace(tuple(steps))


# ---------------------------------------------------------------------------
# Efficiency


def enumerate_feasible(
    problem: Problem, cap: int = DEFAULT_ALLOCATION_CAP
) -> Iterator[Allocation]:
    """All feasible allocations, in state-order-major lexicographic order."""
    order = problem.state_order()
    capacities = problem.capacities()
    officers = problem.officers
    counter = 0

    def walk(k: int, used: dict[StateId, int], prefix: list[tuple[OfficerId, StateId]]):
        nonlocal counter
        if k == len(officers):
            counter += 1
            if counter > cap:
                raise CapExceededError(counter, cap)
            yield Allocation(tuple(prefix))
            return
        for s in order:
            if used[s] < capacities[s]:
                used[s] += 1
                prefix.append((officers[k].id, s))
                yield from walk(k + 1, used, prefix)
                prefix.pop()
                used[s] -= 1

    yield from walk(0, {s: 0 for s in capacities}, [])


def _dominates(
    candidate: Allocation,
    allocation: Allocation,
    better: Callable[[int, StateId, StateId], bool],
    officers,
) -> tuple[bool, tuple[OfficerId, ...]]:
    movers = []
    for i, officer in enumerate(officers):
        a, b = candidate[officer.id], allocation[officer.id]
        if a == b:
            continue
        if not better(i, a, b):
            return False, ()
        movers.append(officer.id)
    return bool(movers), tuple(movers)


def visibly_efficient(
    allocation: Allocation,
    messages: Sequence[Message],
    problem: Problem,
    cap: int = DEFAULT_ALLOCATION_CAP,
) -> tuple[bool, DominationWitness | None]:
    """No feasible allocation moves every mover visibly upward."""
    check_feasible(allocation, problem.capacities())

    def better(i: int, a: StateId, b: StateId) -> bool:
        return messages[i].above(a, b)

    for candidate in enumerate_feasible(problem, cap):
        wins, movers = _dominates(candidate, allocation, better, problem.officers)
        if wins:
            return False, DominationWitness(candidate, movers)
    return True, None


def pareto_efficient(
    allocation: Allocation,
    preferences: Sequence[PreferenceOrder],
    problem: Problem,
    cap: int = DEFAULT_ALLOCATION_CAP,
) -> tuple[bool, DominationWitness | None]:
    """No feasible allocation every mover strictly prefers."""
    check_feasible(allocation, problem.capacities())

    def better(i: int, a: StateId, b: StateId) -> bool:
        return preferences[i].prefers(a, b)

    for candidate in enumerate_feasible(problem, cap):
        wins, movers = _dominates(candidate, allocation, better, problem.officers)
        if wins:
            return False, DominationWitness(candidate, movers)
    return True, None


def constrained_pareto_efficient(
    allocation: Allocation,
    preferences: Sequence[PreferenceOrder],
    problem: Problem,
    bounds: UpperBoundSystem,
    cap: int = DEFAULT_ALLOCATION_CAP,
) -> tuple[bool, DominationWitness | None]:
    """Pareto efficiency among bound-respecting allocations only."""
    types = problem.types()
    if not respects_bounds(allocation, bounds, types, problem.capacities()).ok:
        raise ConstraintError("the allocation under test violates the bound system")

    def better(i: int, a: StateId, b: StateId) -> bool:
        return preferences[i].prefers(a, b)

    for candidate in enumerate_feasible(problem, cap):
        if not respects_bounds(candidate, bounds, types).ok:
            continue
        wins, movers = _dominates(candidate, allocation, better, problem.officers)
        if wins:
            return False, DominationWitness(candidate, movers)
    return True, None


# ---------------------------------------------------------------------------
# Incentive checks


def _preference_orders(problem: Problem) -> list[PreferenceOrder]:
    return [
        PreferenceOrder(p) for p in permutations(sorted(problem.universe))
    ]


def _deviation_profiles(
    mech: Mechanism, budget: int, per_officer_factor: Callable[[int], int]
) -> None:
    lists = mech.message_lists()
    total = 0
    for i in range(len(lists)):
        opponents = math.prod(len(ms) for j, ms in enumerate(lists) if j != i)
        total += per_officer_factor(i) * opponents
    _plan(total, budget)


def check_strategy_proof(
    mech: Mechanism, budget: int = DEFAULT_SWEEP_BUDGET
) -> ManipulationWitness | None:
    """Exhaustive search for a profitable deviation from a truthful report."""
    lists = mech.message_lists()
    prefs = _preference_orders(mech.problem)
    _deviation_profiles(
        mech, budget, lambda i: len(prefs) * len(lists[i]) * len(lists[i])
    )
    officers = mech.problem.officers
    for i, officer in enumerate(officers):
        mine = lists[i]
        others = [ms for j, ms in enumerate(lists) if j != i]
        for pref in prefs:
            truthfuls = [m for m in mine if _truthful_for(m, pref)]
            for truthful in truthfuls:
                for rest in product(*others):
                    base = _insert(rest, i, truthful)
                    base_state = mech.run(base)[officer.id]
                    for deviation in mine:
                        swapped = _insert(rest, i, deviation)
                        dev_state = mech.run(swapped)[officer.id]
                        if pref.prefers(dev_state, base_state):
                            return ManipulationWitness(
                                officer.id,
                                pref,
                                truthful,
                                deviation,
                                rest,
                                base_state,
                                dev_state,
                            )
    return None


def _truthful_for(message: Message, pref: PreferenceOrder) -> bool:
    return all(pref.prefers(a, b) for a, b in message.pairs)


def _insert(
    rest: tuple[Message, ...], index: int, mine: Message
) -> tuple[Message, ...]:
    return rest[:index] + (mine,) + rest[index:]


def check_expressiveness(
    mech: Mechanism, budget: int = DEFAULT_SWEEP_BUDGET
) -> ExpressivenessWitness | None:
    """Every deviation outcome must be comparable, under the original
    report, to the original outcome."""
    lists = mech.message_lists()
    _deviation_profiles(mech, budget, lambda i: len(lists[i]) * len(lists[i]))
    officers = mech.problem.officers
    for i, officer in enumerate(officers):
        mine = lists[i]
        others = [ms for j, ms in enumerate(lists) if j != i]
        for original in mine:
            for rest in product(*others):
                base = _insert(rest, i, original)
                base_state = mech.run(base)[officer.id]
                for deviation in mine:
                    dev_state = mech.run(_insert(rest, i, deviation))[officer.id]
                    if not comparable(dev_state, base_state, original):
                        return ExpressivenessWitness(
                            officer.id, base, deviation, base_state, dev_state
                        )
    return None


def _state_open_for(
    officer_index: int,
    state: StateId,
    allocation: Allocation,
    problem: Problem,
) -> bool:
    # Available to officer i: strictly-higher-priority officers do not
    # already fill the state's capacity at the original outcome.
    ahead = sum(
        1
        for j, other in enumerate(problem.officers)
        if j < officer_index and allocation[other.id] == state
    )
    return ahead < problem.capacities()[state]


def check_availability(
    mech: Mechanism, budget: int = DEFAULT_SWEEP_BUDGET
) -> AvailabilityWitness | None:
    """Every deviation outcome must be open at the original outcome."""
    lists = mech.message_lists()
    _deviation_profiles(mech, budget, lambda i: len(lists[i]) * len(lists[i]))
    for i, officer in enumerate(mech.problem.officers):
        mine = lists[i]
        others = [ms for j, ms in enumerate(lists) if j != i]
        for original in mine:
            for rest in product(*others):
                base = _insert(rest, i, original)
                outcome = mech.run(base)
                for deviation in mine:
                    dev_state = mech.run(_insert(rest, i, deviation))[officer.id]
                    if not _state_open_for(i, dev_state, outcome, mech.problem):
                        return AvailabilityWitness(officer.id, base, deviation, dev_state)
    return None


def check_weak_availability(
    mech: Mechanism, budget: int = DEFAULT_SWEEP_BUDGET
) -> AvailabilityWitness | None:
    """Availability restricted to deviations the officer truly weakly
    prefers, quantified over every truthful report."""
    lists = mech.message_lists()
    prefs = _preference_orders(mech.problem)
    _deviation_profiles(
        mech, budget, lambda i: len(prefs) * len(lists[i]) * len(lists[i])
    )
    for i, officer in enumerate(mech.problem.officers):
        mine = lists[i]
        others = [ms for j, ms in enumerate(lists) if j != i]
        for pref in prefs:
            for truthful in (m for m in mine if _truthful_for(m, pref)):
                for rest in product(*others):
                    base = _insert(rest, i, truthful)
                    outcome = mech.run(base)
                    base_state = outcome[officer.id]
                    for deviation in mine:
                        dev_state = mech.run(_insert(rest, i, deviation))[officer.id]
                        if not pref.weakly_prefers(dev_state, base_state):
                            continue
                        if not _state_open_for(i, dev_state, outcome, mech.problem):
                            return AvailabilityWitness(
                                officer.id, base, deviation, dev_state, pref
                            )
    return None


def check_coherence(
    mech: Mechanism, budget: int = DEFAULT_SWEEP_BUDGET
) -> CoherenceWitness | None:
    """Whenever a deviation changes the outcome, the original report must
    rank the original outcome strictly above the deviation outcome."""
    lists = mech.message_lists()
    _deviation_profiles(mech, budget, lambda i: len(lists[i]) * len(lists[i]))
    for i, officer in enumerate(mech.problem.officers):
        mine = lists[i]
        others = [ms for j, ms in enumerate(lists) if j != i]
        for original in mine:
            for rest in product(*others):
                base = _insert(rest, i, original)
                base_state = mech.run(base)[officer.id]
                for deviation in mine:
                    dev_state = mech.run(_insert(rest, i, deviation))[officer.id]
                    if dev_state == base_state:
                        continue
                    if dev_state in maximal_elements(
                        {base_state, dev_state}, original
                    ):
                        return CoherenceWitness(
                            officer.id, base, deviation, base_state, dev_state
                        )
    return None


# ---------------------------------------------------------------------------
# Dynamic mechanism audit


def check_dynamic_stepwise_dominance(
    problem: Problem,
    bounds: UpperBoundSystem,
    preferences: Mapping[OfficerId, PreferenceOrder],
    menu_cap: int = 7,
) -> StepDominanceWitness | None:
    """Truthful menu rankings are dominant in the dynamic run.

    For every officer and every alternative ranking of the menu they were
    shown, the whole run is replayed with that single report swapped
    (everyone else stays truthful); the officer must never end up in a
    state they truly prefer to their truthful assignment.
    """
    _, trace = dynamic_modular_priority_run(
        problem, bounds, truthful_provider(preferences)
    )
    for step in trace.steps:
        menu = step.menu or ()
        if len(menu) > menu_cap:
            raise CapExceededError(math.factorial(len(menu)), math.factorial(menu_cap))
        pref = preferences[step.officer]
        for ranking in permutations(menu):

            def deviate(officer, shown, _who=step.officer, _r=ranking):
                if officer.id == _who:
                    return tuple(s for s in _r if s in shown)
                return preferences[officer.id].restrict(shown)

            _, rerun = dynamic_modular_priority_run(problem, bounds, deviate)
            dev_state = rerun.allocation()[step.officer]
            if pref.prefers(dev_state, step.assigned):
                return StepDominanceWitness(
                    step.officer, menu, step.assigned, dev_state, ranking
                )
    return None


# ---------------------------------------------------------------------------
# Witness replay


def verify_envy(
    witness: EnvyWitness,
    allocation: Allocation,
    messages: Sequence[Message],
    problem: Problem,
) -> bool:
    ids = [o.id for o in problem.officers]
    i, j = ids.index(witness.officer), ids.index(witness.envied)
    return (
        i < j
        and allocation[witness.officer] == witness.officer_state
        and allocation[witness.envied] == witness.envied_state
        and witness.officer_state != witness.envied_state
        and messages[i].above(witness.envied_state, witness.officer_state)
    )


def verify_waste(
    witness: WasteWitness,
    allocation: Allocation,
    messages: Sequence[Message],
    problem: Problem,
) -> bool:
    ids = [o.id for o in problem.officers]
    i = ids.index(witness.officer)
    occupancy = allocation.occupancy().get(witness.state, 0)
    return (
        allocation[witness.officer] == witness.officer_state
        and witness.state != witness.officer_state
        and occupancy < problem.capacities()[witness.state]
        and messages[i].above(witness.state, witness.officer_state)
    )


def verify_manipulation(mech: Mechanism, witness: ManipulationWitness) -> bool:
    ids = [o.id for o in mech.problem.officers]
    i = ids.index(witness.officer)
    base = _insert(witness.opponents, i, witness.truthful)
    swapped = _insert(witness.opponents, i, witness.deviation)
    return (
        _truthful_for(witness.truthful, witness.preference)
        and mech.run(base)[witness.officer] == witness.truthful_state
        and mech.run(swapped)[witness.officer] == witness.deviation_state
        and witness.preference.prefers(witness.deviation_state, witness.truthful_state)
    )


def verify_domination(
    witness: DominationWitness,
    allocation: Allocation,
    problem: Problem,
    better: Callable[[int, StateId, StateId], bool],
) -> bool:
    check_feasible(witness.dominating, problem.capacities())
    wins, movers = _dominates(witness.dominating, allocation, better, problem.officers)
    return wins and set(movers) == set(witness.movers)
