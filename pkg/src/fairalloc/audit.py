"""Mechanism runs with attached axiom audits.

A run report pairs an allocation with the verdicts of the requested
audits and a step-by-step trace.  Its canonical JSON payload is fully
deterministic: keys are sorted, sets are rendered as sorted lists, and
no wall-clock data enters the payload, so identical inputs always
serialize to identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from .axioms import (
    constrained_pareto_efficient,
    pareto_efficient,
    visibly_efficient,
    visibly_unfair_witness,
)
from .constraints import Allocation, ConstraintError, bound_count, respects_bounds
from .instance import InstanceDocument, InstanceError
from .mechanisms import (
    RankingProvider,
    RunTrace,
    dynamic_modular_priority_run,
    m_queue_run,
    modular_priority_run,
    partitioned_priority_run,
    ranked_partitioned_priority_run,
    serial_dictatorship,
)
from .relations import Message, PreferenceOrder

MECHANISMS = ("sd", "mqueue", "pp", "rpp", "modular", "dynamic-modular")
AUDITS = ("fairness", "bounds", "efficiency", "pareto", "cpe")


class PreconditionError(ValueError):
    """The instance lacks what the chosen mechanism needs."""


def jsonable(value: Any) -> Any:
    """Render engine objects as plain JSON data, deterministically."""
    if isinstance(value, Message):
        return {"pairs": sorted([a, b] for a, b in value.pairs)}
    if isinstance(value, PreferenceOrder):
        return {"ranking": list(value.ranking)}
    if isinstance(value, Allocation):
        return {officer: state for officer, state in value.items}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        out = {
            f.name: jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
        out["kind"] = type(value).__name__
        return out
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in sorted(value.items())}
    if isinstance(value, frozenset):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class AuditVerdict:
    audit: str
    status: str  # "pass" | "fail" | "skipped"
    witness: Any = None
    detail: str = ""

    def payload(self) -> dict[str, Any]:
        return {
            "audit": self.audit,
            "status": self.status,
            "witness": jsonable(self.witness),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class RunReport:
    instance: str
    mechanism: str
    allocation: Allocation
    messages: tuple[Message, ...] | None
    verdicts: tuple[AuditVerdict, ...]
    trace: RunTrace | None

    def ok(self) -> bool:
        return all(v.status != "fail" for v in self.verdicts)

    def payload(self) -> dict[str, Any]:
        steps: list[dict[str, Any]] = []
        if self.trace is not None:
            for step in self.trace.steps:
                row = jsonable(step)
                row.pop("kind", None)
                steps.append({k: v for k, v in row.items() if v is not None})
        return {
            "instance": self.instance,
            "mechanism": self.mechanism,
            "allocation": jsonable(self.allocation),
            "messages": None
            if self.messages is None
            else [jsonable(m) for m in self.messages],
            "verdicts": [v.payload() for v in self.verdicts],
            "steps": steps,
        }

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))


def _messages_for(doc: InstanceDocument) -> tuple[Message, ...]:
    """Explicit profile if the document ships one, else truthful reports."""
    if doc.messages is not None:
        return doc.message_profile()
    return doc.truthful_profile()


def execute(
    doc: InstanceDocument,
    mechanism: str,
    provider: RankingProvider | None = None,
) -> tuple[Allocation, RunTrace | None, tuple[Message, ...] | None]:
    """Run one mechanism on a document.

    Returns the allocation, the step trace when the engine produces one,
    and the message profile the run consumed (for dynamic runs, the
    reports elicited step by step).
    """
    problem = doc.problem()
    if mechanism == "sd":
        kinds = [
            (doc.space_spec_for(o) or {}).get("kind") for o in problem.officers
        ]
        if any(kind != "complete" for kind in kinds):
            raise PreconditionError(
                "serial dictatorship needs complete message spaces; "
                "this instance configures "
                + ", ".join(sorted({str(k) for k in kinds}))
            )
        prefs = doc.preference_profile()
        allocation = serial_dictatorship(problem, prefs)
        return allocation, None, doc.truthful_profile()
    if mechanism == "mqueue":
        messages = _messages_for(doc)
        allocation, trace = m_queue_run(problem, messages)
        return allocation, trace, messages
    if mechanism == "pp":
        messages = _messages_for(doc)
        allocation, trace = partitioned_priority_run(
            problem, messages, doc.partitions(), doc.selector_list()
        )
        return allocation, trace, messages
    if mechanism == "rpp":
        messages = _messages_for(doc)
        allocation, trace = ranked_partitioned_priority_run(
            problem, messages, doc.partitions(), doc.selector_list()
        )
        return allocation, trace, messages
    if mechanism == "modular":
        messages = _messages_for(doc)
        allocation, trace = modular_priority_run(
            problem, doc.bounds, messages, doc.exogenous_indices()
        )
        return allocation, trace, messages
    if mechanism == "dynamic-modular":
        if provider is None:
            from .mechanisms import truthful_provider

            provider = truthful_provider(doc.preference_map())
        allocation, trace = dynamic_modular_priority_run(
            problem, doc.bounds, provider
        )
        messages = tuple(
            step.message for step in trace.steps if step.message is not None
        )
        return allocation, trace, messages
    raise PreconditionError(f"unknown mechanism {mechanism!r}")


def binding_bounds(doc: InstanceDocument, allocation: Allocation) -> tuple[str, ...]:
    """Labels of bounds whose count has reached the ceiling."""
    types = doc.problem().types()
    return tuple(
        h.describe()
        for h in doc.bounds
        if bound_count(h, allocation, types) >= h.ceiling
    )


def audit_allocation(
    doc: InstanceDocument,
    allocation: Allocation,
    messages: tuple[Message, ...] | None,
    audits: Sequence[str],
) -> tuple[AuditVerdict, ...]:
    problem = doc.problem()
    verdicts = []
    for audit in audits:
        if audit not in AUDITS:
            raise PreconditionError(f"unknown audit {audit!r}")
        if audit == "bounds":
            report = respects_bounds(allocation, doc.bounds, problem.types())
            binding = binding_bounds(doc, allocation)
            detail = (
                f"binding: {', '.join(binding)}" if binding else "no bound binding"
            )
            verdicts.append(
                AuditVerdict(
                    "bounds",
                    "pass" if report.ok else "fail",
                    None if report.ok else report.violations,
                    detail,
                )
            )
            continue
        if audit in ("fairness", "efficiency"):
            if messages is None:
                verdicts.append(
                    AuditVerdict(audit, "skipped", None, "no reports to audit")
                )
                continue
            if audit == "fairness":
                witness = visibly_unfair_witness(allocation, messages, problem)
                verdicts.append(
                    AuditVerdict(
                        "fairness",
                        "pass" if witness is None else "fail",
                        witness,
                    )
                )
            else:
                ok, witness = visibly_efficient(allocation, messages, problem)
                verdicts.append(
                    AuditVerdict("efficiency", "pass" if ok else "fail", witness)
                )
            continue
        # pareto and cpe need the true preferences
        if doc.true_preferences is None:
            verdicts.append(
                AuditVerdict(audit, "skipped", None, "no true preferences on file")
            )
            continue
        prefs = doc.preference_profile()
        if audit == "pareto":
            ok, witness = pareto_efficient(allocation, prefs, problem)
            verdicts.append(
                AuditVerdict("pareto", "pass" if ok else "fail", witness)
            )
        else:
            try:
                ok, witness = constrained_pareto_efficient(
                    allocation, prefs, problem, doc.bounds
                )
            except ConstraintError as exc:
                verdicts.append(AuditVerdict("cpe", "skipped", None, str(exc)))
                continue
            verdicts.append(AuditVerdict("cpe", "pass" if ok else "fail", witness))
    return tuple(verdicts)


def run_with_audits(
    doc: InstanceDocument,
    mechanism: str,
    audits: Sequence[str] = ("fairness", "bounds"),
    provider: RankingProvider | None = None,
) -> RunReport:
    allocation, trace, messages = execute(doc, mechanism, provider)
    verdicts = audit_allocation(doc, allocation, messages, audits)
    return RunReport(
        instance=doc.name,
        mechanism=mechanism,
        allocation=allocation,
        messages=messages,
        verdicts=verdicts,
        trace=trace,
    )
