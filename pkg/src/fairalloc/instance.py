"""Problem instances as strict JSON documents.

A document carries officers (priority = rank order), capacitated states,
upper bounds, per-officer or per-type message-space configs, and the
optional pieces a run may need: true preferences, an explicit message
profile, exogenous zone rankings, zone-selector overrides, and an
explicit outcome table.  Unknown fields anywhere are rejected, so a
fixture that parses is exactly what it says it is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .constraints import Allocation, UpperBound, UpperBoundSystem
from .mechanisms import Officer, Problem, ZoneOverride, ZoneSelector
from .relations import Message, PreferenceOrder, RelationError, StateId, validate_message
from .spaces import (
    CompleteSpace,
    ExplicitSpace,
    MessageSpace,
    Partition,
    RankedZonalSpace,
    SpaceError,
    ZonalSpace,
    induced_partition,
    truthful_messages,
)

OfficerId = str

SPACE_KINDS = ("complete", "zonal", "ranked_zonal", "explicit", "modular_induced")


class InstanceError(ValueError):
    """Malformed, dangling or contradictory instance documents."""


def _require_keys(obj: Mapping[str, Any], allowed: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise InstanceError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceError(f"unknown field {sorted(unknown)[0]!r} in {where}")


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise InstanceError(f"{where} must be a non-empty string")
    return value


def _int(value: Any, where: str, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise InstanceError(f"{where} must be an integer >= {minimum}")
    return value


def _pairs(raw: Any, universe: frozenset[StateId], where: str) -> Message:
    if not isinstance(raw, list):
        raise InstanceError(f"{where} must be a list of state pairs")
    pairs = set()
    for item in raw:
        if not isinstance(item, list) or len(item) != 2:
            raise InstanceError(f"{where} holds a malformed pair: {item!r}")
        pairs.add((item[0], item[1]))
    try:
        return validate_message(pairs, universe)
    except RelationError as exc:
        raise InstanceError(f"{where}: {exc}") from exc


@dataclass
class InstanceDocument:
    """A validated instance, with builders for every engine input."""

    name: str
    description: str
    officers: tuple[Officer, ...]
    states: tuple[tuple[StateId, int], ...]
    bounds: UpperBoundSystem
    space_specs: dict[str, dict[str, Any]] = field(default_factory=dict)
    true_preferences: dict[OfficerId, PreferenceOrder] | None = None
    messages: dict[OfficerId, Message] | None = None
    exogenous_zones: dict[OfficerId, tuple[frozenset[StateId], ...]] | None = None
    selectors: dict[OfficerId, ZoneSelector] | None = None
    outcome_rows: tuple[tuple[dict[OfficerId, Message], Allocation], ...] | None = None

    # -- engine inputs ----------------------------------------------------

    def problem(self) -> Problem:
        return Problem.of(self.officers, self.states)

    @property
    def universe(self) -> frozenset[StateId]:
        return frozenset(s for s, _ in self.states)

    def space_spec_for(self, officer: Officer) -> dict[str, Any] | None:
        spec = self.space_specs.get(officer.id)
        if spec is None:
            spec = self.space_specs.get(officer.type)
        return spec

    def space_for(self, officer: Officer) -> MessageSpace:
        spec = self.space_spec_for(officer)
        if spec is None:
            raise InstanceError(
                f"no message space configured for officer {officer.id!r}"
            )
        kind = spec["kind"]
        if kind == "complete":
            return CompleteSpace(self.universe)
        if kind == "zonal":
            return ZonalSpace(self._partition(spec))
        if kind == "ranked_zonal":
            return RankedZonalSpace(self._partition(spec))
        if kind == "explicit":
            return ExplicitSpace(
                self.universe,
                tuple(
                    _pairs(raw, self.universe, "message_spaces.explicit")
                    for raw in spec["messages"]
                ),
            )
        if kind == "modular_induced":
            return ZonalSpace(induced_partition(self.bounds, officer.type, self.universe))
        raise InstanceError(f"unknown message space kind {kind!r}")

    def spaces(self) -> tuple[MessageSpace, ...]:
        return tuple(self.space_for(o) for o in self.officers)

    def partitions(self) -> list[Partition]:
        """One partition per officer, from zonal or ranked-zonal configs."""
        out = []
        for officer in self.officers:
            space = self.space_for(officer)
            partition = getattr(space, "partition", None)
            if partition is None:
                raise InstanceError(
                    f"officer {officer.id!r} has no zonal message space"
                )
            out.append(partition)
        return out

    def _partition(self, spec: Mapping[str, Any]) -> Partition:
        zones = spec["zones"]
        try:
            partition = Partition.of([tuple(z) for z in zones])
        except SpaceError as exc:
            raise InstanceError(str(exc)) from exc
        if partition.universe != self.universe:
            raise InstanceError("zones must cover every state exactly once")
        return partition

    def preference_map(self) -> dict[OfficerId, PreferenceOrder]:
        if self.true_preferences is None:
            raise InstanceError("the instance carries no true preferences")
        missing = [o.id for o in self.officers if o.id not in self.true_preferences]
        if missing:
            raise InstanceError(f"no true preference for officer {missing[0]!r}")
        return dict(self.true_preferences)

    def preference_profile(self) -> tuple[PreferenceOrder, ...]:
        prefs = self.preference_map()
        return tuple(prefs[o.id] for o in self.officers)

    def message_profile(self) -> tuple[Message, ...]:
        if self.messages is None:
            raise InstanceError("the instance carries no explicit messages")
        missing = [o.id for o in self.officers if o.id not in self.messages]
        if missing:
            raise InstanceError(f"no message for officer {missing[0]!r}")
        return tuple(self.messages[o.id] for o in self.officers)

    def truthful_profile(self) -> tuple[Message, ...]:
        """The first truthful message of each officer's space.

        Zonal and complete spaces have exactly one truthful message per
        preference; ranked-zonal spaces may have several, in which case
        enumeration order breaks the tie deterministically.
        """
        prefs = self.preference_map()
        profile = []
        for officer in self.officers:
            space = self.space_for(officer)
            candidates = truthful_messages(space, prefs[officer.id], max_states=9)
            if not candidates:
                raise InstanceError(
                    f"officer {officer.id!r} has no truthful message in their space"
                )
            profile.append(candidates[0])
        return tuple(profile)

    def exogenous_indices(self) -> dict[OfficerId, tuple[int, ...]] | None:
        """Exogenous zone rankings as induced-partition indices."""
        if self.exogenous_zones is None:
            return None
        out = {}
        for officer in self.officers:
            blocks = self.exogenous_zones.get(officer.id)
            if blocks is None:
                continue
            partition = induced_partition(self.bounds, officer.type, self.universe)
            indices = []
            for block in blocks:
                for idx, zone in enumerate(partition.zones):
                    if zone == block:
                        indices.append(idx)
                        break
                else:
                    raise InstanceError(
                        f"exogenous block {sorted(block)} of officer "
                        f"{officer.id!r} is not an induced zone"
                    )
            if sorted(indices) != list(range(len(partition.zones))):
                raise InstanceError(
                    f"exogenous ranking of officer {officer.id!r} must list "
                    "every induced zone exactly once"
                )
            out[officer.id] = tuple(indices)
        return out

    def selector_list(self) -> list[ZoneSelector] | None:
        if self.selectors is None:
            return None
        default = ZoneSelector()
        if any(
            (self.space_spec_for(o) or {}).get("kind") == "ranked_zonal"
            for o in self.officers
        ):
            default = ZoneSelector(rule="ranked-first")
        return [self.selectors.get(o.id, default) for o in self.officers]

    def outcome_table(self) -> dict[tuple[Message, ...], Allocation]:
        if self.outcome_rows is None:
            raise InstanceError("the instance carries no outcome table")
        table = {}
        for row_messages, allocation in self.outcome_rows:
            missing = [o.id for o in self.officers if o.id not in row_messages]
            if missing:
                raise InstanceError(
                    f"outcome table row lacks a message for {missing[0]!r}"
                )
            key = tuple(row_messages[o.id] for o in self.officers)
            table[key] = allocation
        return table


# ---------------------------------------------------------------------------
# Parsing


TOP_FIELDS = {
    "name",
    "description",
    "officers",
    "states",
    "bounds",
    "message_spaces",
    "true_preferences",
    "messages",
    "exogenous_zone_rankings",
    "zone_selectors",
    "outcome_table",
}


def parse_instance(data: Mapping[str, Any]) -> InstanceDocument:
    _require_keys(data, TOP_FIELDS, "instance")
    name = data.get("name", "")
    description = data.get("description", "")
    if not isinstance(name, str) or not isinstance(description, str):
        raise InstanceError("name and description must be strings")

    officers = _parse_officers(data.get("officers", []))
    states = _parse_states(data.get("states", []))
    universe = frozenset(s for s, _ in states)
    officer_ids = {o.id for o in officers}
    types = {o.type for o in officers}

    total = sum(q for _, q in states)
    if total < len(officers):
        raise InstanceError(
            f"capacity shortfall: {total} seats for {len(officers)} officers"
        )

    bounds = _parse_bounds(data.get("bounds", []), universe, types)
    doc = InstanceDocument(name, description, officers, states, bounds)

    doc.space_specs = _parse_space_specs(
        data.get("message_spaces", {}), officer_ids, types, universe
    )
    if "true_preferences" in data:
        doc.true_preferences = _parse_preferences(
            data["true_preferences"], officer_ids, universe
        )
    if "messages" in data:
        doc.messages = _parse_messages(data["messages"], officer_ids, universe)
    if "exogenous_zone_rankings" in data:
        doc.exogenous_zones = _parse_exogenous(
            data["exogenous_zone_rankings"], officer_ids, universe
        )
    if "zone_selectors" in data:
        doc.selectors = _parse_selectors(
            data["zone_selectors"], officers, universe
        )
    if "outcome_table" in data:
        doc.outcome_rows = _parse_outcome_table(
            data["outcome_table"], officers, universe
        )
    return doc


def _parse_officers(raw: Any) -> tuple[Officer, ...]:
    if not isinstance(raw, list):
        raise InstanceError("officers must be a list")
    rows = []
    for entry in raw:
        _require_keys(entry, {"id", "type", "rank"}, "officers[]")
        rows.append(
            (
                _string(entry.get("id"), "officer id"),
                _string(entry.get("type", "t"), "officer type"),
                entry.get("rank"),
            )
        )
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise InstanceError(f"officer id {dup!r} repeats")
    ranks = [r[2] for r in rows]
    if any(r is not None for r in ranks):
        if any(not isinstance(r, int) or isinstance(r, bool) for r in ranks):
            raise InstanceError("officer ranks must all be integers when used")
        if sorted(ranks) != list(range(1, len(rows) + 1)):
            raise InstanceError("officer ranks must be a permutation of 1..n")
        rows.sort(key=lambda r: r[2])
    return tuple(Officer(i, t) for i, t, _ in rows)


def _parse_states(raw: Any) -> tuple[tuple[StateId, int], ...]:
    if not isinstance(raw, list):
        raise InstanceError("states must be a list")
    out = []
    for entry in raw:
        _require_keys(entry, {"id", "capacity"}, "states[]")
        out.append(
            (
                _string(entry.get("id"), "state id"),
                _int(entry.get("capacity"), "state capacity", 1),
            )
        )
    names = [s for s, _ in out]
    if len(set(names)) != len(names):
        dup = next(s for s in names if names.count(s) > 1)
        raise InstanceError(f"state id {dup!r} repeats")
    return tuple(out)


def _parse_bounds(
    raw: Any, universe: frozenset[StateId], types: set[str]
) -> UpperBoundSystem:
    if not isinstance(raw, list):
        raise InstanceError("bounds must be a list")
    bounds = []
    for entry in raw:
        _require_keys(entry, {"types", "states", "ceiling", "label"}, "bounds[]")
        b_types = entry.get("types", [])
        b_states = entry.get("states", [])
        if not isinstance(b_types, list) or not isinstance(b_states, list):
            raise InstanceError("bound types and states must be lists")
        for t in b_types:
            if t not in types:
                raise InstanceError(f"bound references unknown type {t!r}")
        for s in b_states:
            if s not in universe:
                raise InstanceError(f"bound references unknown state {s!r}")
        if not b_types or not b_states:
            raise InstanceError("a bound needs at least one type and one state")
        bounds.append(
            UpperBound.of(
                b_types,
                b_states,
                _int(entry.get("ceiling"), "bound ceiling", 0),
                label=entry.get("label", ""),
            )
        )
    return UpperBoundSystem.of(bounds)


def _parse_space_specs(
    raw: Any,
    officer_ids: set[str],
    types: set[str],
    universe: frozenset[StateId],
) -> dict[str, dict[str, Any]]:
    if not isinstance(raw, Mapping):
        raise InstanceError("message_spaces must map officers or types to configs")
    specs: dict[str, dict[str, Any]] = {}
    for key, spec in raw.items():
        if key not in officer_ids and key not in types:
            raise InstanceError(
                f"message space key {key!r} is neither an officer nor a type"
            )
        kind = spec.get("kind") if isinstance(spec, Mapping) else None
        if kind not in SPACE_KINDS:
            raise InstanceError(f"unknown message space kind {kind!r}")
        if kind in ("zonal", "ranked_zonal"):
            _require_keys(spec, {"kind", "zones"}, f"message_spaces[{key}]")
            zones = spec.get("zones")
            if not isinstance(zones, list) or not zones:
                raise InstanceError(f"message_spaces[{key}] needs a zones list")
            seen: set[str] = set()
            for zone in zones:
                for s in zone:
                    if s not in universe:
                        raise InstanceError(
                            f"message_spaces[{key}] references unknown state {s!r}"
                        )
                    if s in seen:
                        raise InstanceError(
                            f"message_spaces[{key}] repeats state {s!r}"
                        )
                    seen.add(s)
            if seen != universe:
                raise InstanceError(
                    f"message_spaces[{key}] zones must cover every state"
                )
        elif kind == "explicit":
            _require_keys(spec, {"kind", "messages"}, f"message_spaces[{key}]")
            if not isinstance(spec.get("messages"), list):
                raise InstanceError(f"message_spaces[{key}] needs a messages list")
        else:
            _require_keys(spec, {"kind"}, f"message_spaces[{key}]")
        specs[key] = dict(spec)
    return specs


def _parse_preferences(
    raw: Any, officer_ids: set[str], universe: frozenset[StateId]
) -> dict[OfficerId, PreferenceOrder]:
    if not isinstance(raw, Mapping):
        raise InstanceError("true_preferences must map officers to rankings")
    out = {}
    for officer, ranking in raw.items():
        if officer not in officer_ids:
            raise InstanceError(
                f"true_preferences references unknown officer {officer!r}"
            )
        if not isinstance(ranking, list) or set(ranking) != universe or len(
            ranking
        ) != len(universe):
            raise InstanceError(
                f"preference of {officer!r} must rank every state exactly once"
            )
        out[officer] = PreferenceOrder(tuple(ranking))
    return out


def _parse_messages(
    raw: Any, officer_ids: set[str], universe: frozenset[StateId]
) -> dict[OfficerId, Message]:
    if not isinstance(raw, Mapping):
        raise InstanceError("messages must map officers to pair lists")
    out = {}
    for officer, pairs in raw.items():
        if officer not in officer_ids:
            raise InstanceError(f"messages references unknown officer {officer!r}")
        out[officer] = _pairs(pairs, universe, f"messages[{officer}]")
    return out


def _parse_exogenous(
    raw: Any, officer_ids: set[str], universe: frozenset[StateId]
) -> dict[OfficerId, tuple[frozenset[StateId], ...]]:
    if not isinstance(raw, Mapping):
        raise InstanceError("exogenous_zone_rankings must map officers to zone lists")
    out = {}
    for officer, blocks in raw.items():
        if officer not in officer_ids:
            raise InstanceError(
                f"exogenous_zone_rankings references unknown officer {officer!r}"
            )
        if not isinstance(blocks, list):
            raise InstanceError(f"exogenous ranking of {officer!r} must be a list")
        parsed = []
        seen: set[str] = set()
        for block in blocks:
            for s in block:
                if s not in universe:
                    raise InstanceError(
                        f"exogenous ranking of {officer!r} references "
                        f"unknown state {s!r}"
                    )
                if s in seen:
                    raise InstanceError(
                        f"exogenous ranking of {officer!r} repeats state {s!r}"
                    )
                seen.add(s)
            parsed.append(frozenset(block))
        out[officer] = tuple(parsed)
    return out


def _parse_selectors(
    raw: Any, officers: tuple[Officer, ...], universe: frozenset[StateId]
) -> dict[OfficerId, ZoneSelector]:
    if not isinstance(raw, Mapping):
        raise InstanceError("zone_selectors must map officers to selector configs")
    index_of = {o.id: k for k, o in enumerate(officers)}
    out = {}
    for officer, config in raw.items():
        if officer not in index_of:
            raise InstanceError(
                f"zone_selectors references unknown officer {officer!r}"
            )
        _require_keys(config, {"rule", "overrides"}, f"zone_selectors[{officer}]")
        overrides = []
        for entry in config.get("overrides", []):
            _require_keys(
                entry,
                {"zone", "available", "messages"},
                f"zone_selectors[{officer}].overrides[]",
            )
            available = entry.get("available")
            if available is not None:
                for s in available:
                    if s not in universe:
                        raise InstanceError(
                            f"selector override references unknown state {s!r}"
                        )
                available = frozenset(available)
            watches = []
            for watch in entry.get("messages", []):
                _require_keys(
                    watch,
                    {"officer", "pairs"},
                    f"zone_selectors[{officer}].overrides[].messages[]",
                )
                target = watch.get("officer")
                if target not in index_of:
                    raise InstanceError(
                        f"selector override watches unknown officer {target!r}"
                    )
                message = _pairs(
                    watch.get("pairs"), universe, "selector override pairs"
                )
                watches.append((index_of[target], message.pairs))
            overrides.append(
                ZoneOverride(
                    zone=_int(entry.get("zone"), "override zone", 0),
                    available=available,
                    messages=tuple(watches),
                )
            )
        out[officer] = ZoneSelector(
            rule=config.get("rule", "first-intersecting"),
            overrides=tuple(overrides),
        )
    return out


def _parse_outcome_table(
    raw: Any, officers: tuple[Officer, ...], universe: frozenset[StateId]
) -> tuple[tuple[dict[OfficerId, Message], Allocation], ...]:
    if not isinstance(raw, list):
        raise InstanceError("outcome_table must be a list of rows")
    ids = {o.id for o in officers}
    rows = []
    for entry in raw:
        _require_keys(entry, {"messages", "allocation"}, "outcome_table[]")
        messages = {}
        for officer, pairs in entry.get("messages", {}).items():
            if officer not in ids:
                raise InstanceError(
                    f"outcome table references unknown officer {officer!r}"
                )
            messages[officer] = _pairs(
                pairs, universe, f"outcome_table messages[{officer}]"
            )
        allocation_raw = entry.get("allocation", {})
        items = []
        for officer in officers:
            state = allocation_raw.get(officer.id)
            if state is None:
                raise InstanceError(
                    f"outcome table row lacks an assignment for {officer.id!r}"
                )
            if state not in universe:
                raise InstanceError(
                    f"outcome table assigns unknown state {state!r}"
                )
            items.append((officer.id, state))
        unknown = set(allocation_raw) - ids
        if unknown:
            raise InstanceError(
                f"outcome table assigns unknown officer {sorted(unknown)[0]!r}"
            )
        rows.append((messages, Allocation(tuple(items))))
    return tuple(rows)


def loads_instance(text: str) -> InstanceDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(
            f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise InstanceError("an instance document must be a JSON object")
    return parse_instance(data)


def load_instance(path: str | Path) -> InstanceDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    return loads_instance(text)
