"""Stepwise sessions: turn order, menus, idempotence, engine equivalence."""

from __future__ import annotations

import pytest

from fairalloc.fixtures import load_fixture
from fairalloc.instance import parse_instance
from fairalloc.mechanisms import (
    dynamic_modular_priority_run,
    scripted_provider,
    truthful_provider,
)
from fairalloc.session import (
    DynamicSession,
    RankingRejectedError,
    SessionCompleteError,
    SessionIncompleteError,
    WrongTurnError,
)


def fresh() -> DynamicSession:
    return DynamicSession(load_fixture("example_6_1"))


class TestTurnTaking:
    def test_opening_view(self):
        session = fresh()
        view = session.view()
        assert session.status == "awaiting-input"
        assert view.round == 0
        assert view.officer.id == "i1"
        assert view.menu == ("s1", "s2")
        assert view.menu_remaining == (2, 1)
        assert view.binding == ()
        assert view.remaining == {"s1": 2, "s2": 1}

    def test_wrong_officer_is_a_stale_round(self):
        session = fresh()
        with pytest.raises(WrongTurnError) as exc:
            session.submit("i2", ["s1", "s2"])
        assert exc.value.code == "stale_round"
        assert exc.value.expected == "i1"

    def test_ranking_must_order_the_menu_exactly(self):
        session = fresh()
        for bad in (["s1"], ["s1", "s1"], ["s1", "s2", "s3"], []):
            with pytest.raises(RankingRejectedError) as exc:
                session.submit("i1", bad)
            assert exc.value.code == "invalid_ranking"
            assert exc.value.menu == ("s1", "s2")

    def test_progress_and_shrinking_menu(self):
        session = fresh()
        result = session.submit("i1", ["s2", "s1"])
        assert result["committed"] == {"officer": "i1", "state": "s2"}
        assert result["status"] == "awaiting-input"
        view = session.view()
        assert view.round == 1
        assert view.officer.id == "i2"
        assert view.menu == ("s1",)
        assert view.binding == ()

    def test_binding_bound_trims_the_menu(self):
        session = fresh()
        session.submit("i1", ["s1", "s2"])
        view = session.view()
        assert view.menu == ("s2",)
        assert view.binding == ("s1-quota",)

    def test_exact_repeat_is_idempotent(self):
        session = fresh()
        first = session.submit("i1", ["s2", "s1"])
        again = session.submit("i1", ["s2", "s1"])
        assert again == first
        assert session.round == 1

    def test_changed_repeat_is_rejected(self):
        session = fresh()
        session.submit("i1", ["s2", "s1"])
        with pytest.raises(WrongTurnError):
            session.submit("i1", ["s1", "s2"])

    def test_completion_closes_the_session(self):
        session = fresh()
        session.submit("i1", ["s2", "s1"])
        result = session.submit("i2", ["s1"])
        assert result["status"] == "complete"
        assert session.allocation().items == (("i1", "s2"), ("i2", "s1"))
        with pytest.raises(SessionCompleteError):
            session.view()
        with pytest.raises(SessionCompleteError):
            session.submit("i2", ["s2"])

    def test_results_need_completion(self):
        session = fresh()
        with pytest.raises(SessionIncompleteError):
            session.allocation()
        with pytest.raises(SessionIncompleteError):
            session.report()


class TestDisclosure:
    def test_menu_only_hides_aggregates(self):
        session = DynamicSession(load_fixture("example_6_1"), disclosure="menu-only")
        view = session.view()
        assert view.menu == ("s1", "s2")
        assert view.remaining is None
        assert view.binding == ()
        assert view.menu_remaining == (None, None)

    def test_unknown_disclosure_rejected(self):
        with pytest.raises(ValueError, match="disclosure"):
            DynamicSession(load_fixture("example_6_1"), disclosure="gossip")


class TestEngineEquivalence:
    def test_session_trace_matches_batch_engine(self):
        session = fresh()
        session.submit("i1", ["s2", "s1"])
        session.submit("i2", ["s1"])
        batch_alloc, batch_trace = dynamic_modular_priority_run(
            session.problem,
            session.bounds,
            scripted_provider({"i1": ("s2", "s1"), "i2": ("s1",)}),
        )
        assert session.allocation() == batch_alloc
        assert session.trace().steps == batch_trace.steps

    def test_truthful_session_equals_truthful_engine_on_the_large_fixture(self):
        doc = load_fixture("example_5_2")
        prefs = doc.preference_map()
        session = DynamicSession(doc)
        while not session.complete:
            view = session.view()
            ranking = prefs[view.officer.id].restrict(view.menu)
            session.submit(view.officer.id, ranking)
        batch_alloc, batch_trace = dynamic_modular_priority_run(
            doc.problem(), doc.bounds, truthful_provider(prefs)
        )
        assert session.allocation() == batch_alloc
        assert session.trace().steps == batch_trace.steps

    def test_report_passes_on_the_elicited_path(self):
        session = fresh()
        session.submit("i1", ["s2", "s1"])
        session.submit("i2", ["s1"])
        report = session.report()
        assert report.ok()
        assert {v.audit for v in report.verdicts} == {"fairness", "bounds", "cpe"}

    def test_degenerate_session_is_born_complete(self):
        doc = parse_instance({"officers": [], "states": []})
        session = DynamicSession(doc)
        assert session.complete
        assert session.allocation().items == ()
        assert session.report().ok()
