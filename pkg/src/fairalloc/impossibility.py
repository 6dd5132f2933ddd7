"""Case search over two-state scenarios: which message-space shapes admit a
visibly fair, bound-respecting, constrained-efficient outcome table?

With two states, each officer's space either holds both strict orders
(the officer is "eliciting") or only the silent message.  For every
eliciting pattern the search checks, cell by cell, whether some outcome
table survives:

- A cell is a message profile.  Its candidate set holds the feasible,
  bound-respecting allocations that are visibly fair under the cell.
- A candidate survives the cell when it stays constrained Pareto
  efficient under every true-preference profile whose truthful reports
  land on that cell (silent officers' preferences range freely).
- The case admits a mechanism exactly when every cell keeps at least
  one survivor; any such per-cell choice is a valid table.

An empty candidate set means visible fairness and the bound system are
outright incompatible at that cell; an empty survivor set means every
table is beaten at that cell by some true-preference profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .axioms import (
    CapExceededError,
    DominationWitness,
    EnvyWitness,
    WasteWitness,
    constrained_pareto_efficient,
    enumerate_feasible,
    visibly_unfair_witness,
)
from .constraints import Allocation, UpperBoundSystem, respects_bounds
from .mechanisms import Problem
from .relations import Message, PreferenceOrder, empty_message
from .spaces import complete_order_message

FORCED_VIOLATION = "forced-violation"
TABLES_DEFEATED = "tables-defeated"
MECHANISM_EXISTS = "mechanism-exists"

DEFAULT_CASE_BUDGET = 200_000


class ShapeError(ValueError):
    """The search needs exactly two states."""


@dataclass(frozen=True)
class CellDefeat:
    """One candidate allocation beaten at a cell.

    The preferences are truthful for the cell's messages, yet the
    allocation is constrained-Pareto dominated under them.
    """

    allocation: Allocation
    preferences: tuple[PreferenceOrder, ...]
    witness: DominationWitness


@dataclass(frozen=True)
class CellComplaint:
    """One bound-respecting allocation rejected by visible fairness."""

    allocation: Allocation
    witness: EnvyWitness | WasteWitness


@dataclass(frozen=True)
class CaseReport:
    """Verdict for one eliciting pattern."""

    eliciting: tuple[bool, ...]
    status: str
    cell: tuple[Message, ...] | None = None
    defeats: tuple[CellDefeat, ...] = ()
    complaints: tuple[CellComplaint, ...] = ()
    table: tuple[tuple[tuple[Message, ...], Allocation], ...] = ()

    @property
    def label(self) -> str:
        return "(" + ", ".join("Y" if e else "N" for e in self.eliciting) + ")"

    @property
    def eliciting_count(self) -> int:
        return sum(self.eliciting)


@dataclass(frozen=True)
class ImpossibilityReport:
    cases: tuple[CaseReport, ...]

    def admits_mechanism(self) -> bool:
        return any(c.status == MECHANISM_EXISTS for c in self.cases)

    @property
    def impossible(self) -> bool:
        return not self.admits_mechanism()

    def case(self, pattern: str | Sequence[bool]) -> CaseReport:
        if isinstance(pattern, str):
            wanted = tuple(
                p.strip().upper() == "Y"
                for p in pattern.strip("()").split(",")
            )
        else:
            wanted = tuple(bool(p) for p in pattern)
        for c in self.cases:
            if c.eliciting == wanted:
                return c
        raise KeyError(f"no case with pattern {wanted}")

    def statuses(self) -> dict[str, str]:
        return {c.label: c.status for c in self.cases}

    def violation_counts(self) -> tuple[int, ...]:
        """Eliciting counts at which fairness already clashes with the bounds."""
        return tuple(
            sorted(
                {c.eliciting_count for c in self.cases if c.status == FORCED_VIOLATION}
            )
        )


def _cells(
    eliciting: Sequence[bool],
    orders: Sequence[Message],
    silent: Message,
) -> Iterator[tuple[Message, ...]]:
    lists = [tuple(orders) if e else (silent,) for e in eliciting]
    return product(*lists)


def impossibility_search(
    problem: Problem,
    bounds: UpperBoundSystem,
    budget: int = DEFAULT_CASE_BUDGET,
) -> ImpossibilityReport:
    """Check every eliciting pattern of a two-state scenario.

    The overall scenario admits a visibly fair, bound-respecting,
    constrained-efficient mechanism exactly when some pattern's report
    carries MECHANISM_EXISTS (with a witness table); otherwise every
    pattern is refuted, cell by cell.
    """
    states = problem.state_order()
    if len(states) != 2:
        raise ShapeError(
            f"the case search covers two-state scenarios, got {len(states)}"
        )
    a, b = states
    orders = (complete_order_message((a, b)), complete_order_message((b, a)))
    prefs = (PreferenceOrder((a, b)), PreferenceOrder((b, a)))
    pref_of = {orders[0].pairs: prefs[0], orders[1].pairs: prefs[1]}
    silent = empty_message(problem.universe)
    types = problem.types()
    respecting = [
        alloc
        for alloc in enumerate_feasible(problem)
        if respects_bounds(alloc, bounds, types).ok
    ]

    n = len(problem.officers)
    # cases x cells per case x truthful sources per cell x candidates
    work = (2 ** n) ** 3 * max(len(respecting), 1)
    if work > budget:
        raise CapExceededError(work, budget)

    cases = []
    for eliciting in product((False, True), repeat=n):
        cases.append(
            _case_report(problem, bounds, eliciting, orders, silent, prefs, pref_of, respecting)
        )
    return ImpossibilityReport(tuple(cases))


def _truthful_sources(
    cell: tuple[Message, ...],
    eliciting: Sequence[bool],
    prefs: tuple[PreferenceOrder, PreferenceOrder],
    pref_of: dict,
) -> Iterator[tuple[PreferenceOrder, ...]]:
    """True-preference profiles whose truthful reports produce the cell."""
    per_officer = [
        (pref_of[cell[i].pairs],) if eliciting[i] else prefs
        for i in range(len(cell))
    ]
    return product(*per_officer)


def _case_report(
    problem: Problem,
    bounds: UpperBoundSystem,
    eliciting: tuple[bool, ...],
    orders: tuple[Message, Message],
    silent: Message,
    prefs: tuple[PreferenceOrder, PreferenceOrder],
    pref_of: dict,
    respecting: Sequence[Allocation],
) -> CaseReport:
    survivors: list[tuple[tuple[Message, ...], list[Allocation]]] = []
    defeated: tuple | None = None
    for cell in _cells(eliciting, orders, silent):
        candidates = [
            alloc
            for alloc in respecting
            if visibly_unfair_witness(alloc, cell, problem) is None
        ]
        if not candidates:
            complaints = tuple(
                CellComplaint(alloc, visibly_unfair_witness(alloc, cell, problem))
                for alloc in respecting
            )
            return CaseReport(
                eliciting, FORCED_VIOLATION, cell=cell, complaints=complaints
            )
        alive = []
        defeats = []
        for alloc in candidates:
            beaten = None
            for true_profile in _truthful_sources(cell, eliciting, prefs, pref_of):
                ok, witness = constrained_pareto_efficient(
                    alloc, true_profile, problem, bounds
                )
                if not ok:
                    beaten = CellDefeat(alloc, true_profile, witness)
                    break
            if beaten is None:
                alive.append(alloc)
            else:
                defeats.append(beaten)
        if not alive and defeated is None:
            defeated = (cell, tuple(defeats))
        survivors.append((cell, alive))
    if defeated is not None:
        cell, defeats = defeated
        return CaseReport(eliciting, TABLES_DEFEATED, cell=cell, defeats=defeats)
    table = tuple((cell, alive[0]) for cell, alive in survivors)
    return CaseReport(eliciting, MECHANISM_EXISTS, table=table)
