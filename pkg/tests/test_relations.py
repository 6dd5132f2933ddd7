"""Message validation, maximal elements, and truthfulness."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from fairalloc.relations import (
    CycleError,
    EmptySubsetError,
    Message,
    PreferenceOrder,
    ReflexivePairError,
    UniverseMismatchError,
    UnknownStateError,
    comparable,
    complete_message,
    contains_more_information,
    empty_message,
    is_truthful,
    maximal_elements,
    transitive_closure,
    validate_message,
)

S3 = {"s1", "s2", "s3"}


def msg(*pairs, universe=None):
    return validate_message(pairs, universe or S3)


class TestValidateMessage:
    def test_keeps_pairs_raw(self):
        m = msg(("s1", "s2"), ("s2", "s3"))
        assert m.pairs == {("s1", "s2"), ("s2", "s3")}
        assert not m.above("s1", "s3")

    def test_empty_message_is_valid(self):
        m = msg()
        assert m.pairs == frozenset()

    def test_rejects_reflexive_pair(self):
        with pytest.raises(ReflexivePairError) as err:
            msg(("s2", "s2"))
        assert err.value.state == "s2"

    def test_rejects_unknown_state(self):
        with pytest.raises(UnknownStateError):
            msg(("s1", "s9"))

    def test_rejects_two_cycle(self):
        with pytest.raises(CycleError):
            msg(("s1", "s2"), ("s2", "s1"))

    def test_cycle_error_carries_witness(self):
        with pytest.raises(CycleError) as err:
            msg(("s1", "s2"), ("s2", "s3"), ("s3", "s1"))
        cycle = err.value.cycle
        assert cycle[0] == cycle[-1]
        assert len(cycle) == 4
        for a, b in zip(cycle, cycle[1:]):
            assert (a, b) in {("s1", "s2"), ("s2", "s3"), ("s3", "s1")}


class TestMaximalElements:
    def test_partial_report_keeps_incomparable_top(self):
        # s1 beats only s3; s2 beats s3; s1 and s2 are incomparable.
        m = msg(("s2", "s3"), ("s1", "s3"))
        assert maximal_elements(S3, m) == {"s1", "s2"}

    def test_complete_order_has_unique_maximum(self):
        m = complete_message(PreferenceOrder(("s2", "s1", "s3")))
        assert maximal_elements(S3, m) == {"s2"}

    def test_empty_report_keeps_everything(self):
        assert maximal_elements(S3, empty_message(S3)) == S3

    def test_respects_the_subset(self):
        m = complete_message(PreferenceOrder(("s1", "s2", "s3")))
        assert maximal_elements({"s2", "s3"}, m) == {"s2"}

    def test_rejects_empty_subset(self):
        with pytest.raises(EmptySubsetError):
            maximal_elements(set(), empty_message(S3))

    def test_rejects_foreign_state(self):
        with pytest.raises(UnknownStateError):
            maximal_elements({"s1", "s9"}, empty_message(S3))

    def test_no_closure_is_applied(self):
        # With pairs s1>s2, s2>s3 only, s3 is not directly beaten by s1;
        # still s3 is beaten by s2, so the maximal set is {s1}.
        m = msg(("s1", "s2"), ("s2", "s3"))
        assert maximal_elements(S3, m) == {"s1"}
        assert maximal_elements({"s1", "s3"}, m) == {"s1", "s3"}


class TestPreferenceTop:
    def test_picks_the_best_of_a_subset(self):
        q = PreferenceOrder(("s2", "s1", "s3"))
        assert q.top({"s1", "s3"}) == "s1"
        assert q.top({"s1", "s2", "s3"}) == "s2"

    def test_rejects_empty_and_foreign(self):
        q = PreferenceOrder(("s1", "s2"))
        with pytest.raises(EmptySubsetError):
            q.top(set())
        with pytest.raises(UnknownStateError):
            q.top({"s1", "s9"})


class TestComparable:
    def test_direct_pair(self):
        m = msg(("s2", "s3"), ("s1", "s3"))
        assert comparable("s2", "s3", m)
        assert comparable("s3", "s1", m)
        assert not comparable("s1", "s2", m)

    def test_state_compares_to_itself(self):
        assert comparable("s1", "s1", empty_message(S3))

    def test_unknown_state_raises(self):
        with pytest.raises(UnknownStateError):
            comparable("s1", "s9", empty_message(S3))


class TestTruthfulness:
    def test_empty_report_is_always_truthful(self):
        p = PreferenceOrder(("s3", "s1", "s2"))
        assert is_truthful(empty_message(S3), p)

    def test_agreeing_pairs_are_truthful(self):
        p = PreferenceOrder(("s3", "s1", "s2"))
        assert is_truthful(msg(("s3", "s2"), ("s1", "s2")), p)

    def test_single_reversed_pair_is_untruthful(self):
        p = PreferenceOrder(("s3", "s1", "s2"))
        assert not is_truthful(msg(("s3", "s2"), ("s2", "s1")), p)

    def test_universe_mismatch_raises(self):
        p = PreferenceOrder(("s1", "s2"))
        with pytest.raises(UniverseMismatchError):
            is_truthful(empty_message(S3), p)


class TestRefinement:
    def test_superset_refines(self):
        coarse = msg(("s1", "s3"))
        fine = msg(("s1", "s3"), ("s1", "s2"))
        assert contains_more_information(fine, coarse)
        assert not contains_more_information(coarse, fine)

    def test_closure_is_a_refinement(self):
        m = msg(("s1", "s2"), ("s2", "s3"))
        closed = transitive_closure(m)
        assert contains_more_information(closed, m)
        assert closed.above("s1", "s3")


states = st.integers(1, 5).map(lambda n: tuple(f"s{i}" for i in range(1, n + 1)))


@st.composite
def acyclic_messages(draw):
    universe = draw(states)
    order = draw(st.permutations(universe))
    all_pairs = [
        (order[i], order[j])
        for i in range(len(order))
        for j in range(i + 1, len(order))
    ]
    chosen = draw(st.sets(st.sampled_from(all_pairs)) if all_pairs else st.just(set()))
    return validate_message(chosen, universe)


@given(acyclic_messages())
def test_maximal_is_never_empty(m):
    assert maximal_elements(m.universe, m)


@given(acyclic_messages())
def test_maximal_elements_are_unbeaten(m):
    top = maximal_elements(m.universe, m)
    for s in top:
        assert not any(m.above(o, s) for o in m.universe)


@given(acyclic_messages(), st.randoms())
def test_maximal_of_subset_stays_inside(m, rng):
    pool = [s for s in sorted(m.universe) if rng.random() < 0.7]
    if not pool:
        pool = [sorted(m.universe)[0]]
    top = maximal_elements(pool, m)
    assert top <= set(pool)
    assert top


@given(acyclic_messages())
def test_comparability_is_symmetric(m):
    for a in m.universe:
        for b in m.universe:
            assert comparable(a, b, m) == comparable(b, a, m)


@given(st.permutations(("s1", "s2", "s3", "s4")))
def test_complete_message_is_truthful_only_for_its_order(ranking):
    p = PreferenceOrder(tuple(ranking))
    m = complete_message(p)
    assert is_truthful(m, p)
    flipped = PreferenceOrder(tuple(reversed(ranking)))
    assert not is_truthful(m, flipped)
