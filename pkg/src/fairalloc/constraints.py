"""Distributional upper bounds and allocation-level checks against them.

An upper bound caps how many officers of the covered types may sit in
the covered states.  A system of bounds is respected when every ceiling
holds, and a bound is binding when its count meets its ceiling exactly.

Sequential solvency asks a harder question: whatever feasible,
bound-respecting placement the other officers take, does every officer
always still have some admissible state?  The search collapses officers
to types (placements become type-by-state count matrices) and hunts for
a counterexample matrix with a budgeted depth-first search.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

from .relations import StateId

OfficerId = str
OfficerType = str


class ConstraintError(ValueError):
    """Malformed bounds or allocations handed to a checker."""


class InfeasibleAllocationError(ConstraintError):
    def __init__(self, state: StateId, occupancy: int, capacity: int):
        self.state = state
        super().__init__(
            f"state {state!r} holds {occupancy} officers but has capacity {capacity}"
        )


@dataclass(frozen=True)
class UpperBound:
    """At most `ceiling` officers of `types` may be assigned inside `states`."""

    types: frozenset[OfficerType]
    states: frozenset[StateId]
    ceiling: int
    label: str = ""

    def __post_init__(self) -> None:
        if self.ceiling < 0:
            raise ConstraintError("a ceiling cannot be negative")
        if not self.types or not self.states:
            raise ConstraintError("a bound must cover at least one type and one state")

    def covers(self, state: StateId, officer_type: OfficerType) -> bool:
        return state in self.states and officer_type in self.types

    def describe(self) -> str:
        if self.label:
            return self.label
        t = ",".join(sorted(self.types))
        s = ",".join(sorted(self.states))
        return f"[{t}]x[{s}]<={self.ceiling}"

    @classmethod
    def of(
        cls,
        types: Iterable[OfficerType],
        states: Iterable[StateId],
        ceiling: int,
        label: str = "",
    ) -> UpperBound:
        return cls(frozenset(types), frozenset(states), ceiling, label)


@dataclass(frozen=True)
class UpperBoundSystem:
    bounds: tuple[UpperBound, ...]

    def __post_init__(self) -> None:
        # exact duplicates are redundant and would double-count in any
        # dict keyed by bound, so normalise them away up front
        deduped = tuple(dict.fromkeys(self.bounds))
        if len(deduped) != len(self.bounds):
            object.__setattr__(self, "bounds", deduped)

    def __iter__(self):
        return iter(self.bounds)

    def __len__(self) -> int:
        return len(self.bounds)

    @classmethod
    def of(cls, bounds: Iterable[UpperBound]) -> UpperBoundSystem:
        return cls(tuple(bounds))

    @classmethod
    def empty(cls) -> UpperBoundSystem:
        return cls(())


@dataclass(frozen=True)
class Allocation:
    """One state per officer, kept in priority order."""

    items: tuple[tuple[OfficerId, StateId], ...]

    def __getitem__(self, officer: OfficerId) -> StateId:
        for oid, state in self.items:
            if oid == officer:
                return state
        raise KeyError(officer)

    def __contains__(self, officer: OfficerId) -> bool:
        return any(oid == officer for oid, _ in self.items)

    def mapping(self) -> dict[OfficerId, StateId]:
        return dict(self.items)

    def occupancy(self) -> dict[StateId, int]:
        occ: dict[StateId, int] = {}
        for _, state in self.items:
            occ[state] = occ.get(state, 0) + 1
        return occ

    @classmethod
    def of(cls, assignment: Mapping[OfficerId, StateId] | Iterable[tuple[OfficerId, StateId]]) -> Allocation:
        if isinstance(assignment, Mapping):
            return cls(tuple(assignment.items()))
        return cls(tuple(assignment))


def check_feasible(allocation: Allocation, capacities: Mapping[StateId, int]) -> None:
    """Raise unless every state's occupancy is within its capacity."""
    occ = allocation.occupancy()
    for state, n in sorted(occ.items()):
        if state not in capacities:
            raise ConstraintError(f"allocation assigns unknown state {state!r}")
        if n > capacities[state]:
            raise InfeasibleAllocationError(state, n, capacities[state])


def signature(
    bounds: UpperBoundSystem, state: StateId, officer_type: OfficerType
) -> frozenset[UpperBound]:
    """The bounds that cover this state for this officer type."""
    return frozenset(h for h in bounds if h.covers(state, officer_type))


def bound_count(
    bound: UpperBound,
    allocation: Allocation,
    types: Mapping[OfficerId, OfficerType],
) -> int:
    return sum(
        1
        for oid, state in allocation.items
        if bound.covers(state, types[oid])
    )


@dataclass(frozen=True)
class BoundViolation:
    bound: UpperBound
    count: int


@dataclass(frozen=True)
class BoundsReport:
    ok: bool
    violations: tuple[BoundViolation, ...]


def respects_bounds(
    allocation: Allocation,
    bounds: UpperBoundSystem,
    types: Mapping[OfficerId, OfficerType],
    capacities: Mapping[StateId, int] | None = None,
) -> BoundsReport:
    """Whether every bound's count stays at or below its ceiling."""
    if capacities is not None:
        check_feasible(allocation, capacities)
    violations = tuple(
        BoundViolation(h, bound_count(h, allocation, types))
        for h in bounds
        if bound_count(h, allocation, types) > h.ceiling
    )
    return BoundsReport(not violations, violations)


def binding_bounds(
    allocation: Allocation,
    bounds: UpperBoundSystem,
    types: Mapping[OfficerId, OfficerType],
) -> tuple[UpperBound, ...]:
    """Bounds whose count equals the ceiling exactly, in system order."""
    return tuple(
        h for h in bounds if bound_count(h, allocation, types) == h.ceiling
    )


# ---------------------------------------------------------------------------
# Sequential solvency


@dataclass(frozen=True)
class SolvencyCounterexample:
    """A placement of some of the other officers that leaves one type stuck.

    `placement` maps (type, state) to a count; it is feasible and respects
    every bound, yet each state is either full or covered by some bound
    already at its ceiling for the stuck type.  It need not seat every
    other officer: a sequential run can strand someone mid-way even when
    no way of seating all the rest exists.
    """

    stuck_type: OfficerType
    placement: tuple[tuple[tuple[OfficerType, StateId], int], ...]

    def matrix(self) -> dict[tuple[OfficerType, StateId], int]:
        return dict(self.placement)


@dataclass(frozen=True)
class SolvencyVerdict:
    status: str  # "pass" | "counterexample" | "inconclusive"
    counterexample: SolvencyCounterexample | None
    nodes: int


class _BudgetExhausted(Exception):
    pass


def check_sequential_solvency(
    capacities: Mapping[StateId, int],
    type_counts: Mapping[OfficerType, int],
    bounds: UpperBoundSystem,
    node_budget: int = 10_000_000,
) -> SolvencyVerdict:
    """Search for a partial placement of the officers that strands one more.

    For each candidate type, every state must be ruled out: either the
    state is full, or some bound covering it for that type sits at its
    ceiling.  The search enumerates, per state, which reason rules it out,
    then asks whether any count matrix realises all chosen reasons at
    once.  Matrices may seat any number of the other officers, not all of
    them: seating officers one at a time can jam before everyone is
    placed, so the stranding prefix can be short.  Exhausting the search
    space proves solvency; exhausting the node budget yields an
    inconclusive verdict, never a pass.
    """
    states = sorted(capacities)
    typs = sorted(t for t, n in type_counts.items() if n >= 0)
    nodes = 0

    def spend(n: int = 1) -> None:
        nonlocal nodes
        nodes += n
        if nodes > node_budget:
            raise _BudgetExhausted()

    try:
        for stuck in typs:
            if type_counts[stuck] < 1:
                continue
            rows = {t: type_counts[t] - (1 if t == stuck else 0) for t in typs}
            found = _find_stranding_matrix(states, capacities, rows, bounds, stuck, spend)
            if found is not None:
                placement = tuple(
                    sorted(((t, s), v) for (t, s), v in found.items() if v > 0)
                )
                return SolvencyVerdict(
                    "counterexample", SolvencyCounterexample(stuck, placement), nodes
                )
    except _BudgetExhausted:
        return SolvencyVerdict("inconclusive", None, nodes)
    return SolvencyVerdict("pass", None, nodes)


def _find_stranding_matrix(states, capacities, rows, bounds, stuck, spend):
    """One stuck type: try every per-state reason pattern, then fill counts."""
    reason_menu = []
    for s in states:
        menu: list[UpperBound | None] = [None]  # None means "state is full"
        menu.extend(h for h in bounds if h.covers(s, stuck))
        reason_menu.append(menu)

    total = sum(rows.values())
    seen: set[tuple[frozenset, frozenset]] = set()
    for pattern in product(*reason_menu):
        spend()
        full_states = {s for s, r in zip(states, pattern) if r is None}
        eq_bounds = {r for r in pattern if r is not None}
        key = (frozenset(full_states), frozenset(eq_bounds))
        if key in seen:
            continue
        seen.add(key)
        # A full state must be fillable at all; a ceiling must be reachable.
        if sum(capacities[s] for s in full_states) > total:
            continue
        if not _pattern_feasible(capacities, rows, full_states, eq_bounds, total):
            continue
        solution = _fill_matrix(
            states, capacities, rows, bounds, full_states, eq_bounds, spend
        )
        if solution is not None:
            return solution
    return None


def _pattern_feasible(capacities, rows, full_states, eq_bounds, total) -> bool:
    """Cheap mass-balance tests before the backtracking fill.

    Row totals are exact, so the matrix places exactly `total` officers.
    A bound pinned at its ceiling fixes the mass inside its type-by-state
    rectangle at exactly the ceiling, which caps what full columns can
    demand on either side of the rectangle.
    """
    for h in eq_bounds:
        supply_in = sum(n for t, n in rows.items() if t in h.types)
        cap_in = sum(capacities[s] for s in h.states if s in capacities)
        if h.ceiling > min(supply_in, cap_in):
            return False
        # Full columns outside the rectangle sit entirely outside it.
        outside_full = sum(
            capacities[s] for s in full_states if s not in h.states
        )
        if outside_full > total - h.ceiling:
            return False
        # Full columns inside exceed the ceiling only via uncovered types.
        inside_full = sum(capacities[s] for s in full_states if s in h.states)
        spare_types = sum(n for t, n in rows.items() if t not in h.types)
        if inside_full > h.ceiling + spare_types:
            return False
    return True


def _fill_matrix(states, capacities, rows, bounds, full_states, eq_bounds, spend):
    """Backtracking fill of the type-by-state count matrix.

    Columns are processed tightest first: states that must be exactly
    full, then states covered by a bound pinned at its ceiling, then the
    rest by ascending capacity.  Cell values respect row totals, column
    capacity, and every bound's ceiling; pinned bounds must end exactly
    at the ceiling.  Row totals are ceilings, not targets: a matrix may
    leave officers unseated, since a stranding prefix need not place
    everyone else first.
    """
    typs = sorted(rows)

    def tightness(s):
        if s in full_states:
            return (0, capacities[s], s)
        if any(s in h.states for h in eq_bounds):
            return (1, capacities[s], s)
        return (2, capacities[s], s)

    cols = sorted(states, key=tightness)
    row_rem = dict(rows)
    bound_rem = {h: h.ceiling for h in bounds}
    matrix: dict[tuple[str, str], int] = {}

    def bound_reachable() -> bool:
        # Every pinned bound must still be able to climb to its ceiling.
        for h in eq_bounds:
            room = 0
            for t in typs:
                if t not in h.types:
                    continue
                cell_room = sum(
                    min(row_rem[t], capacities[s] - _col_sum(s))
                    for s in h.states
                    if s in undecided or s == current_col[0]
                )
                room += min(row_rem[t], cell_room)
            if bound_rem[h] > room:
                return False
        return True

    def _col_sum(s):
        return sum(matrix.get((t, s), 0) for t in typs)

    undecided = set(cols)
    current_col: list[str | None] = [None]

    def aggregate_ok() -> bool:
        # Undecided full columns still need officers; leftover officers
        # are fine (they just go unseated), so there is no upper check.
        total_rem = sum(row_rem.values())
        need = sum(
            capacities[s] - _col_sum(s) for s in undecided if s in full_states
        )
        return need <= total_rem

    def place(col_idx: int) -> dict | None:
        if col_idx == len(cols):
            if any(bound_rem[h] != 0 for h in eq_bounds):
                return None
            return dict(matrix)
        s = cols[col_idx]
        undecided.discard(s)
        current_col[0] = s
        result = fill_column(s, 0, 0, col_idx)
        if result is None:
            undecided.add(s)
            current_col[0] = None
        return result

    def fill_column(s, type_idx, col_sum, col_idx) -> dict | None:
        if type_idx == len(typs):
            if s in full_states and col_sum != capacities[s]:
                return None
            if not aggregate_ok() or not bound_reachable():
                return None
            return place(col_idx + 1)
        t = typs[type_idx]
        covering = [h for h in bounds if h.covers(s, t)]
        hi = min(
            [row_rem[t], capacities[s] - col_sum]
            + [bound_rem[h] for h in covering]
        )
        if s not in full_states and not any(h in eq_bounds for h in covering):
            # An officer here fills no declared-full state and feeds no
            # pinned ceiling, so dropping them keeps the pattern intact;
            # such cells can be held at zero without losing any witness.
            hi = 0
        # Largest values first: a stranding matrix packs states tight.
        for v in range(hi, -1, -1):
            spend()
            matrix[(t, s)] = v
            row_rem[t] -= v
            for h in covering:
                bound_rem[h] -= v
            result = fill_column(s, type_idx + 1, col_sum + v, col_idx)
            if result is not None:
                return result
            matrix.pop((t, s))
            row_rem[t] += v
            for h in covering:
                bound_rem[h] += v
        return None

    return place(0)
