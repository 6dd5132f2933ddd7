"""Stepwise elicitation sessions for the dynamic modular mechanism.

A session walks officers in priority order, shows each the menu of
states that are under capacity and clear of every bound binding for
their type, and commits the submitted ranking's top.  The stepping is
the batch engine's loop taken apart, and `replay` reruns the batch
engine on the recorded rankings, so a completed session always agrees
with `dynamic_modular_priority_run` byte for byte.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from typing import Any, Sequence

from .audit import RunReport, audit_allocation
from .constraints import Allocation
from .instance import InstanceDocument
from .mechanisms import (
    EmptyMenuError,
    Officer,
    RunTrace,
    StepRecord,
    _Occupancy,
    _QuotaBook,
    dynamic_modular_priority_run,
    maximal_elements,
    scripted_provider,
)
from .relations import Message, StateId


class SessionError(Exception):
    code = "session_error"


class WrongTurnError(SessionError):
    code = "stale_round"

    def __init__(self, expected: str | None, got: str):
        self.expected = expected
        self.got = got
        super().__init__(
            f"it is {expected!r}'s turn, not {got!r}"
            if expected
            else f"no turn is open for {got!r}"
        )


class RankingRejectedError(SessionError):
    code = "invalid_ranking"

    def __init__(self, menu: tuple[StateId, ...], ranking: Sequence[StateId]):
        self.menu = menu
        self.ranking = tuple(ranking)
        super().__init__(
            f"ranking {list(ranking)} must order exactly the menu {list(menu)}"
        )


class SessionCompleteError(SessionError):
    code = "complete"

    def __init__(self):
        super().__init__("the session is complete")


class SessionIncompleteError(SessionError):
    code = "incomplete"

    def __init__(self):
        super().__init__("the session is not complete yet")


@dataclass(frozen=True)
class RoundView:
    """What the active officer (and the admin screen) may see."""

    round: int
    officer: Officer
    menu: tuple[StateId, ...]
    menu_remaining: tuple[int, ...]
    binding: tuple[str, ...]
    remaining: dict[StateId, int] | None

    def payload(self) -> dict[str, Any]:
        return {
            "round": self.round,
            "officer": {"id": self.officer.id, "type": self.officer.type},
            "menu": [
                {"state": s, "remaining": r}
                for s, r in zip(self.menu, self.menu_remaining)
            ],
            "binding": list(self.binding),
            "remaining": self.remaining,
        }


class DynamicSession:
    """One in-progress dynamic run, fed one ranking at a time."""

    def __init__(
        self,
        doc: InstanceDocument,
        disclosure: str = "full",
        session_id: str | None = None,
    ):
        if disclosure not in ("full", "menu-only"):
            raise ValueError(f"unknown disclosure mode {disclosure!r}")
        self.id = session_id or uuid.uuid4().hex[:12]
        self.doc = doc
        self.disclosure = disclosure
        self.problem = doc.problem()
        self.bounds = doc.bounds
        self._occ = _Occupancy(self.problem)
        self._book = _QuotaBook(self.bounds, {})
        self._steps: list[StepRecord] = []
        self._rankings: dict[str, tuple[StateId, ...]] = {}
        self._responses: dict[str, dict[str, Any]] = {}

    # -- state ------------------------------------------------------------

    @property
    def round(self) -> int:
        return len(self._steps)

    @property
    def complete(self) -> bool:
        return self.round == len(self.problem.officers)

    @property
    def status(self) -> str:
        return "complete" if self.complete else "awaiting-input"

    def active_officer(self) -> Officer | None:
        if self.complete:
            return None
        return self.problem.officers[self.round]

    def committed(self) -> list[dict[str, str]]:
        return [
            {"officer": step.officer, "state": step.assigned}
            for step in self._steps
        ]

    def _menu(self, officer: Officer) -> tuple[tuple[StateId, ...], tuple[str, ...]]:
        available = self._occ.available()
        binding = self._book.binding(officer.type)
        blocked = frozenset(s for h in binding for s in h.states)
        menu = tuple(sorted(available - blocked))
        if not menu:
            raise EmptyMenuError(officer.id)
        return menu, tuple(h.describe() for h in binding)

    def view(self) -> RoundView:
        officer = self.active_officer()
        if officer is None:
            raise SessionCompleteError()
        menu, binding = self._menu(officer)
        full = self.disclosure == "full"
        return RoundView(
            round=self.round,
            officer=officer,
            menu=menu,
            menu_remaining=tuple(
                self._occ.spare(s) if full else None for s in menu
            ),
            binding=binding if full else (),
            remaining={s: self._occ.spare(s) for s in sorted(self.problem.universe)}
            if full
            else None,
        )

    # -- progress ---------------------------------------------------------

    def submit(self, officer_id: str, ranking: Sequence[StateId]) -> dict[str, Any]:
        """Commit one ranking; idempotent for an exact repeat."""
        previous = self._responses.get(officer_id)
        if previous is not None and self._rankings[officer_id] == tuple(ranking):
            return previous
        officer = self.active_officer()
        if officer is None:
            raise SessionCompleteError()
        if officer_id != officer.id:
            raise WrongTurnError(officer.id, officer_id)
        menu, binding = self._menu(officer)
        if sorted(ranking) != sorted(menu):
            raise RankingRejectedError(menu, ranking)
        ranking = tuple(ranking)
        pick = ranking[0]
        pairs = frozenset(
            (ranking[i], ranking[j])
            for i in range(len(ranking))
            for j in range(i + 1, len(ranking))
        )
        message = Message(self.problem.universe, pairs)
        available = self._occ.available()
        self._occ.take(pick)
        self._book.record(pick, officer.type)
        self._steps.append(
            StepRecord(
                officer=officer.id,
                available=tuple(sorted(available)),
                maximal=tuple(sorted(maximal_elements(available, message))),
                assigned=pick,
                menu=menu,
                excluded=tuple(sorted(self.problem.universe - frozenset(menu))),
                binding=binding,
                message=message,
            )
        )
        self._rankings[officer.id] = ranking
        response = {
            "committed": {"officer": officer.id, "state": pick},
            "round": self.round,
            "status": self.status,
        }
        self._responses[officer.id] = response
        return response

    # -- results ----------------------------------------------------------

    def allocation(self) -> Allocation:
        if not self.complete:
            raise SessionIncompleteError()
        return Allocation(tuple((s.officer, s.assigned) for s in self._steps))

    def trace(self) -> RunTrace:
        return RunTrace(tuple(self._steps))

    def elicited_messages(self) -> tuple[Message, ...]:
        return tuple(s.message for s in self._steps if s.message is not None)

    def replay(self) -> tuple[Allocation, RunTrace]:
        """Rerun the batch engine on the recorded rankings."""
        if not self.complete:
            raise SessionIncompleteError()
        return dynamic_modular_priority_run(
            self.problem, self.bounds, scripted_provider(self._rankings)
        )

    def report(
        self, audits: Sequence[str] = ("fairness", "bounds", "cpe")
    ) -> RunReport:
        allocation = self.allocation()
        replayed, replayed_trace = self.replay()
        if replayed != allocation or replayed_trace.steps != self.trace().steps:
            raise SessionError(
                "session steps diverged from the batch engine replay"
            )
        verdicts = audit_allocation(
            self.doc, allocation, self.elicited_messages(), audits
        )
        return RunReport(
            instance=self.doc.name,
            mechanism="dynamic-modular",
            allocation=allocation,
            messages=self.elicited_messages(),
            verdicts=verdicts,
            trace=self.trace(),
        )
