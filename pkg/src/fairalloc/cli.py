"""Command-line front end.

Exit codes: 0 the check or run came back clean, 1 a witness or failing
verdict was found, 2 the search gave up inconclusively (budget), 3 the
invocation or instance was unusable.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Any, Sequence

from .audit import (
    AUDITS,
    MECHANISMS,
    PreconditionError,
    RunReport,
    jsonable,
    run_with_audits,
)
from .axioms import (
    CapExceededError,
    Mechanism,
    check_coherence,
    check_strategy_proof,
    visibly_unfair_witness,
)
from .constraints import check_sequential_solvency
from .fixtures import fixture_names, fixture_text, resolve_instance
from .impossibility import ShapeError, impossibility_search
from .instance import InstanceDocument, InstanceError
from .mechanisms import (
    MechanismError,
    m_queue_run,
    modular_priority_run,
    partitioned_priority_run,
    ranked_partitioned_priority_run,
    scripted_provider,
    serial_dictatorship,
)
from .relations import PreferenceOrder
from .session import DynamicSession, RankingRejectedError
from .spaces import SpaceError, check_richness

PASS, FAIL, INCONCLUSIVE, USAGE = 0, 1, 2, 3

CHECKS = ("sp", "solvency", "richness", "fairness-sweep", "coherence")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); the contract wants 3
        raise UsageError(message)


def _order_of(message) -> PreferenceOrder:
    """Recover the total order a complete message spells out."""
    beats = {s: 0 for s in message.universe}
    for a, _ in message.pairs:
        beats[a] += 1
    ranking = tuple(sorted(beats, key=lambda s: (-beats[s], s)))
    return PreferenceOrder(ranking)


def build_mechanism(doc: InstanceDocument, kind: str | None = None) -> Mechanism:
    """A sweepable mechanism over the document's message spaces."""
    problem = doc.problem()
    if kind is None:
        kinds = {
            (doc.space_spec_for(o) or {}).get("kind") for o in problem.officers
        }
        if doc.outcome_rows is not None:
            kind = "table"
        elif "ranked_zonal" in kinds:
            kind = "rpp"
        elif "modular_induced" in kinds:
            kind = "modular"
        elif "zonal" in kinds:
            kind = "pp"
        else:
            kind = "mqueue"
    spaces = doc.spaces()
    max_states = max(len(problem.universe), 6)
    if kind == "table":
        return Mechanism.from_table(
            problem, spaces, doc.outcome_table(), name="table"
        )
    if kind == "sd":
        def outcome(profile):
            return serial_dictatorship(
                problem, [_order_of(m) for m in profile]
            )
    elif kind == "mqueue":
        def outcome(profile):
            return m_queue_run(problem, profile)[0]
    elif kind == "pp":
        partitions, selectors = doc.partitions(), doc.selector_list()

        def outcome(profile):
            return partitioned_priority_run(
                problem, profile, partitions, selectors
            )[0]
    elif kind == "rpp":
        partitions, selectors = doc.partitions(), doc.selector_list()

        def outcome(profile):
            return ranked_partitioned_priority_run(
                problem, profile, partitions, selectors
            )[0]
    elif kind == "modular":
        exogenous = doc.exogenous_indices()

        def outcome(profile):
            return modular_priority_run(problem, doc.bounds, profile, exogenous)[0]
    else:
        raise UsageError(f"mechanism {kind!r} cannot be swept as a message table")
    return Mechanism(problem, spaces, outcome, name=kind, max_states=max_states)


def _print_verdicts(report: RunReport) -> None:
    print(f"instance:   {report.instance or '(unnamed)'}")
    print(f"mechanism:  {report.mechanism}")
    alloc = ", ".join(f"{o}->{s}" for o, s in report.allocation.items)
    print(f"allocation: {alloc}")
    for v in report.verdicts:
        line = f"  {v.audit:<10} {v.status}"
        if v.detail:
            line += f"  ({v.detail})"
        print(line)
        if v.witness is not None:
            print(f"    witness: {json.dumps(jsonable(v.witness), sort_keys=True)}")


def _write_out(path: str | None, payload: dict[str, Any]) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")


def _type_counts(problem) -> dict[str, int]:
    counts: dict[str, int] = {}
    for officer in problem.officers:
        counts[officer.type] = counts.get(officer.type, 0) + 1
    return counts


# -- run ---------------------------------------------------------------------


def _prompt_session(doc: InstanceDocument, audits: Sequence[str]) -> RunReport:
    session = DynamicSession(doc)
    while not session.complete:
        view = session.view()
        print(f"round {view.round}: officer {view.officer.id} ({view.officer.type})")
        for state, left in zip(view.menu, view.menu_remaining):
            print(f"  {state}  ({left} seat(s) left)")
        if view.binding:
            print(f"  binding bounds: {', '.join(view.binding)}")
        line = input("ranking (best first)> ")
        ranking = [tok for tok in re.split(r"[,\s]+", line.strip()) if tok]
        try:
            result = session.submit(view.officer.id, ranking)
        except RankingRejectedError as exc:
            print(f"  rejected: {exc}")
            continue
        print(f"  committed: {result['committed']['state']}")
    return session.report(audits)


def cmd_run(args) -> int:
    doc = resolve_instance(args.instance)
    audits = _parse_audits(args.audit)
    if args.provider in ("prompt", "file") and args.mechanism != "dynamic-modular":
        raise UsageError(
            f"--provider {args.provider} only applies to dynamic-modular runs"
        )
    if args.provider == "prompt":
        report = _prompt_session(doc, audits)
    elif args.provider == "file":
        if not args.rankings:
            raise UsageError("--provider file needs --rankings <path>")
        with open(args.rankings) as fh:
            rankings = json.load(fh)
        report = run_with_audits(
            doc, args.mechanism, audits, scripted_provider(rankings)
        )
    else:
        report = run_with_audits(doc, args.mechanism, audits)
    _print_verdicts(report)
    _write_out(args.out, report.payload())
    return PASS if report.ok() else FAIL


def _parse_audits(raw: str) -> tuple[str, ...]:
    if raw == "all":
        return AUDITS
    audits = tuple(a.strip() for a in raw.split(",") if a.strip())
    for audit in audits:
        if audit not in AUDITS:
            raise UsageError(
                f"unknown audit {audit!r}; pick from {', '.join(AUDITS)} or 'all'"
            )
    return audits


# -- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    doc = resolve_instance(args.instance)
    out: dict[str, Any] = {"check": args.what, "instance": doc.name}

    if args.what == "solvency":
        problem = doc.problem()
        verdict = check_sequential_solvency(
            problem.capacities(),
            _type_counts(problem),
            doc.bounds,
            node_budget=args.budget or 10_000_000,
        )
        out["status"] = verdict.status
        out["counterexample"] = jsonable(verdict.counterexample)
        _write_out(args.out, out)
        if verdict.status == "pass":
            print(f"solvency: pass ({verdict.nodes} nodes)")
            return PASS
        if verdict.status == "counterexample":
            cx = verdict.counterexample
            placement = ", ".join(f"{t}@{s}x{n}" for (t, s), n in cx.placement)
            print(f"solvency: fail, type {cx.stuck_type!r} strands after [{placement}]")
            return FAIL
        print("solvency: inconclusive (node budget exhausted)")
        return INCONCLUSIVE

    if args.what == "richness":
        for officer in doc.officers:
            space = doc.space_for(officer)
            rich, witness = check_richness(
                space, max_states=max(len(doc.universe), 6)
            )
            if not rich:
                message, pair = witness
                out["officer"] = officer.id
                out["witness"] = {
                    "message": jsonable(message),
                    "pair": list(pair),
                }
                _write_out(args.out, out)
                print(
                    f"richness: fail for officer {officer.id}: covering pair "
                    f"{pair[0]} over {pair[1]} cannot be reversed in place"
                )
                return FAIL
        _write_out(args.out, out | {"status": "pass"})
        print("richness: pass for every officer's space")
        return PASS

    budget = args.budget or 2_000_000
    mechanism = build_mechanism(doc, args.mechanism)

    if args.what == "fairness-sweep":
        if mechanism.profile_count() > budget:
            raise CapExceededError(mechanism.profile_count(), budget)
        for profile in mechanism.profiles():
            allocation = mechanism.run(profile)
            witness = visibly_unfair_witness(
                allocation, profile, mechanism.problem
            )
            if witness is not None:
                out["witness"] = jsonable(witness)
                _write_out(args.out, out)
                print(f"fairness-sweep: fail, {_describe_witness(witness)}")
                return FAIL
        _write_out(args.out, out | {"status": "pass"})
        print(
            f"fairness-sweep: pass over {mechanism.profile_count()} message profiles"
        )
        return PASS

    checker = check_strategy_proof if args.what == "sp" else check_coherence
    witness = checker(mechanism, budget=budget)
    out["witness"] = jsonable(witness)
    _write_out(args.out, out)
    if witness is None:
        print(f"{args.what}: pass over every deviation")
        return PASS
    print(f"{args.what}: fail, {_describe_witness(witness)}")
    return FAIL


def _describe_witness(witness) -> str:
    fields = jsonable(witness)
    kind = fields.pop("kind", type(witness).__name__)
    bits = ", ".join(f"{k}={json.dumps(v, sort_keys=True)}" for k, v in fields.items())
    return f"{kind}({bits})"


# -- impossibility -----------------------------------------------------------


def cmd_impossibility(args) -> int:
    doc = resolve_instance(args.instance)
    report = impossibility_search(
        doc.problem(), doc.bounds, budget=args.budget or 200_000
    )
    for case in report.cases:
        line = f"  {case.label}: {case.status}"
        if case.status == "tables-defeated":
            line += f" ({len(case.defeats)} candidate table entries defeated)"
        elif case.status == "forced-violation":
            line += " (every bound-respecting allocation draws a complaint)"
        print(line)
    payload = {
        "instance": doc.name,
        "cases": [
            {
                "eliciting": case.label,
                "status": case.status,
                "defeats": jsonable(case.defeats),
                "complaints": jsonable(case.complaints),
            }
            for case in report.cases
        ],
    }
    _write_out(args.out, payload)
    if report.admits_mechanism():
        print("verdict: some elicitation pattern admits a visibly fair, "
              "bound-respecting, undefeated table")
        return PASS
    print("verdict: impossible, every elicitation pattern is refuted")
    return FAIL


# -- fixtures / serve ----------------------------------------------------------


def cmd_fixtures(args) -> int:
    if args.action == "list":
        for name in fixture_names():
            print(name)
        return PASS
    print(fixture_text(args.name), end="")
    return PASS


def cmd_serve(args) -> int:
    from .service import serve

    print(f"serving sessions on http://{args.host}:{args.port}")
    serve(host=args.host, port=args.port)
    return PASS


# -- entry -------------------------------------------------------------------


def make_parser() -> _Parser:
    parser = _Parser(prog="fairalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a mechanism and audit the outcome")
    run.add_argument("--instance", required=True, help="file path or fixture name")
    run.add_argument("--mechanism", required=True, choices=MECHANISMS)
    run.add_argument(
        "--audit",
        default="fairness,bounds",
        help="comma-separated audits (fairness,bounds,efficiency,pareto,cpe) or 'all'",
    )
    run.add_argument(
        "--provider",
        default="truth",
        choices=("truth", "prompt", "file"),
        help="where dynamic rankings come from",
    )
    run.add_argument("--rankings", help="JSON file of rankings for --provider file")
    run.add_argument("--out", help="write the canonical JSON report here")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="run one axiom oracle")
    check.add_argument("what", choices=CHECKS)
    check.add_argument("--instance", required=True)
    check.add_argument(
        "--mechanism",
        choices=("sd", "mqueue", "pp", "rpp", "modular", "table"),
        help="mechanism to sweep (default: inferred from the instance)",
    )
    check.add_argument("--budget", type=int, help="sweep or node budget")
    check.add_argument("--out", help="write the JSON verdict here")
    check.set_defaults(func=cmd_check)

    imp = sub.add_parser(
        "impossibility",
        help="search all elicitation patterns for an undefeated outcome table",
    )
    imp.add_argument("--instance", required=True)
    imp.add_argument("--budget", type=int, help="search budget")
    imp.add_argument("--out", help="write the JSON report here")
    imp.set_defaults(func=cmd_impossibility)

    serve_p = sub.add_parser("serve", help="serve the session protocol over HTTP")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8008)
    serve_p.set_defaults(func=cmd_serve)

    fixtures = sub.add_parser("fixtures", help="list or show bundled instances")
    fix_sub = fixtures.add_subparsers(dest="action", required=True)
    fix_sub.add_parser("list").set_defaults(func=cmd_fixtures)
    show = fix_sub.add_parser("show")
    show.add_argument("name")
    show.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except (InstanceError, PreconditionError, ShapeError, SpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except CapExceededError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return INCONCLUSIVE
    except MechanismError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
