"""Strict partial preference reports and complete preference orders.

A message is a set of ordered state pairs: (a, b) means the reporting
officer placed a strictly above b.  Messages are stored exactly as
reported; no transitive closure is applied, so two states are comparable
only if some pair mentions them directly.  A separate closure helper
exists for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

StateId = str


class RelationError(ValueError):
    """Base class for malformed relations and misuse of them."""


class ReflexivePairError(RelationError):
    def __init__(self, state: StateId):
        self.state = state
        super().__init__(f"pair ({state}, {state}) relates a state to itself")


class UnknownStateError(RelationError):
    def __init__(self, state: StateId):
        self.state = state
        super().__init__(f"state {state!r} is not in the universe")


class CycleError(RelationError):
    """Raised when pairs contain a directed cycle; carries one witness."""

    def __init__(self, cycle: tuple[StateId, ...]):
        self.cycle = cycle
        loop = " > ".join(cycle)
        super().__init__(f"pairs contain a cycle: {loop}")


class EmptySubsetError(RelationError):
    def __init__(self) -> None:
        super().__init__("maximal elements are undefined for an empty set")


class UniverseMismatchError(RelationError):
    def __init__(self) -> None:
        super().__init__("the two relations range over different universes")


@dataclass(frozen=True)
class Message:
    """An irreflexive, acyclic strict relation over a fixed state universe."""

    universe: frozenset[StateId]
    pairs: frozenset[tuple[StateId, StateId]]

    def above(self, a: StateId, b: StateId) -> bool:
        """True when the message places a strictly above b."""
        return (a, b) in self.pairs

    def restrict(self, states: Iterable[StateId]) -> Message:
        keep = frozenset(states)
        missing = keep - self.universe
        if missing:
            raise UnknownStateError(sorted(missing)[0])
        return Message(keep, frozenset(p for p in self.pairs if p[0] in keep and p[1] in keep))


@dataclass(frozen=True)
class PreferenceOrder:
    """A strict complete ranking over states, best first."""

    ranking: tuple[StateId, ...]
    _rank: Mapping[StateId, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(set(self.ranking)) != len(self.ranking):
            raise RelationError("ranking repeats a state")
        object.__setattr__(self, "_rank", {s: k for k, s in enumerate(self.ranking)})

    @property
    def universe(self) -> frozenset[StateId]:
        return frozenset(self.ranking)

    def prefers(self, a: StateId, b: StateId) -> bool:
        for s in (a, b):
            if s not in self._rank:
                raise UnknownStateError(s)
        return self._rank[a] < self._rank[b]

    def weakly_prefers(self, a: StateId, b: StateId) -> bool:
        return a == b or self.prefers(a, b)

    def top(self, states: Iterable[StateId]) -> StateId:
        """The most preferred state among a non-empty subset."""
        pool = list(states)
        if not pool:
            raise EmptySubsetError()
        for s in pool:
            if s not in self._rank:
                raise UnknownStateError(s)
        return min(pool, key=self._rank.__getitem__)

    def restrict(self, states: Iterable[StateId]) -> tuple[StateId, ...]:
        keep = set(states)
        return tuple(s for s in self.ranking if s in keep)


def _find_cycle(pairs: frozenset[tuple[StateId, StateId]]) -> tuple[StateId, ...] | None:
    succ: dict[StateId, list[StateId]] = {}
    for a, b in sorted(pairs):
        succ.setdefault(a, []).append(b)
    # Iterative DFS with colour marks; the stack path yields the witness.
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict[StateId, int] = {}
    for root in sorted(succ):
        if colour.get(root, WHITE) != WHITE:
            continue
        path: list[StateId] = []
        stack: list[tuple[StateId, int]] = [(root, 0)]
        colour[root] = GREY
        path.append(root)
        while stack:
            node, i = stack[-1]
            children = succ.get(node, [])
            if i < len(children):
                stack[-1] = (node, i + 1)
                child = children[i]
                c = colour.get(child, WHITE)
                if c == GREY:
                    at = path.index(child)
                    return tuple(path[at:]) + (child,)
                if c == WHITE:
                    colour[child] = GREY
                    path.append(child)
                    stack.append((child, 0))
            else:
                colour[node] = BLACK
                path.pop()
                stack.pop()
    return None


def validate_message(
    pairs: Iterable[tuple[StateId, StateId]], universe: Iterable[StateId]
) -> Message:
    """Check pairs for membership, irreflexivity and acyclicity.

    Returns the validated message; the pair set is kept raw, exactly as
    given.  A cycle raises CycleError carrying one witnessing cycle.
    """
    uni = frozenset(universe)
    pset = frozenset((a, b) for a, b in pairs)
    for a, b in sorted(pset):
        if a not in uni:
            raise UnknownStateError(a)
        if b not in uni:
            raise UnknownStateError(b)
        if a == b:
            raise ReflexivePairError(a)
    cycle = _find_cycle(pset)
    if cycle is not None:
        raise CycleError(cycle)
    return Message(uni, pset)


def maximal_elements(states: Iterable[StateId], message: Message) -> frozenset[StateId]:
    """States in the subset that no other subset member beats in the message.

    Non-empty for non-empty input: the relation is acyclic and finite.
    """
    pool = frozenset(states)
    if not pool:
        raise EmptySubsetError()
    for s in pool:
        if s not in message.universe:
            raise UnknownStateError(s)
    return frozenset(
        s for s in pool if not any((o, s) in message.pairs for o in pool if o != s)
    )


def comparable(a: StateId, b: StateId, message: Message) -> bool:
    """Whether the message orders a against b (a state compares to itself)."""
    for s in (a, b):
        if s not in message.universe:
            raise UnknownStateError(s)
    return a == b or (a, b) in message.pairs or (b, a) in message.pairs


def is_truthful(message: Message, preference: PreferenceOrder) -> bool:
    """Whether every reported pair agrees with the complete preference."""
    if message.universe != preference.universe:
        raise UniverseMismatchError()
    return all(preference.prefers(a, b) for a, b in message.pairs)


def contains_more_information(refined: Message, coarse: Message) -> bool:
    """Whether refined reports every pair of coarse (and possibly more)."""
    if refined.universe != coarse.universe:
        raise UniverseMismatchError()
    return coarse.pairs <= refined.pairs


def transitive_closure(message: Message) -> Message:
    """Diagnostic helper: the closure of the reported pairs.

    Mechanisms and audits never call this; comparability is always taken
    from the raw report.
    """
    closed = set(message.pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c, d in list(closed):
                if b == c and (a, d) not in closed and a != d:
                    closed.add((a, d))
                    changed = True
    return Message(message.universe, frozenset(closed))


def complete_message(preference: PreferenceOrder) -> Message:
    """The fully ordered message matching a complete preference."""
    pairs = set()
    ranking = preference.ranking
    for i, a in enumerate(ranking):
        for b in ranking[i + 1 :]:
            pairs.add((a, b))
    return Message(preference.universe, frozenset(pairs))


def empty_message(universe: Iterable[StateId]) -> Message:
    """The silent report: no pair of distinct states is comparable."""
    return Message(frozenset(universe), frozenset())
