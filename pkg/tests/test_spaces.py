"""Message-space families: enumeration, richness, induced partitions."""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from fairalloc.constraints import UpperBound, UpperBoundSystem
from fairalloc.relations import (
    Message,
    PreferenceOrder,
    comparable,
    empty_message,
    validate_message,
)
from fairalloc.spaces import (
    CompleteSpace,
    EnumerationCapError,
    ExplicitSpace,
    Partition,
    RankedZonalSpace,
    SpaceError,
    ZonalSpace,
    ZoneRanking,
    check_richness,
    enumerate_messages,
    induced_partition,
    ranked_zonal_message,
    truthful_messages,
    truthful_zonal_message,
    zonal_message,
    zone_orders_of,
    zone_ranking_of,
)

P21 = Partition.of([["s1", "s2"], ["s3"]])
P12 = Partition.of([["s1"], ["s2", "s3"]])


class TestPartition:
    def test_rejects_overlap(self):
        with pytest.raises(SpaceError):
            Partition.of([["s1", "s2"], ["s2"]])

    def test_rejects_empty_zone(self):
        with pytest.raises(SpaceError):
            Partition.of([["s1"], []])

    def test_zone_lookup(self):
        assert P21.zone_of("s3") == 1
        assert P21.universe == {"s1", "s2", "s3"}


class TestZonalMessages:
    def test_pairs_are_within_zone_only(self):
        m = zonal_message(P21, [("s2", "s1"), ("s3",)])
        assert m.pairs == {("s2", "s1")}

    def test_order_must_cover_zone(self):
        with pytest.raises(SpaceError):
            zonal_message(P21, [("s1",), ("s3",)])

    def test_ranked_adds_one_pair_per_zone_pair(self):
        m = ranked_zonal_message(P21, [("s1", "s2"), ("s3",)], ZoneRanking((0, 1)))
        assert m.pairs == {("s1", "s2"), ("s1", "s3")}

    def test_ranked_reversed_ranking(self):
        # Zone order (s2, s1) makes s1 the bottom of the lower zone.
        m = ranked_zonal_message(P21, [("s2", "s1"), ("s3",)], ZoneRanking((1, 0)))
        assert m.pairs == {("s2", "s1"), ("s3", "s1")}

    def test_ranked_three_zones_pairs_all_ranked_zone_pairs(self):
        part = Partition.of([["a1", "a2"], ["b1"], ["c1", "c2"]])
        m = ranked_zonal_message(
            part, [("a1", "a2"), ("b1",), ("c2", "c1")], ZoneRanking((2, 0, 1))
        )
        # Cross pairs: c over a, c over b, a over b; tops to bottoms.
        assert ("c2", "a2") in m.pairs
        assert ("c2", "b1") in m.pairs
        assert ("a1", "b1") in m.pairs
        cross = {p for p in m.pairs if p not in {("a1", "a2"), ("c2", "c1")}}
        assert len(cross) == 3


class TestEnumeration:
    def test_complete_count(self):
        space = CompleteSpace(frozenset({"s1", "s2", "s3"}))
        msgs = enumerate_messages(space)
        assert len(msgs) == 6 == space.count()
        assert len({m.pairs for m in msgs}) == 6

    def test_zonal_count(self):
        space = ZonalSpace(P21)
        msgs = enumerate_messages(space)
        assert len(msgs) == 2 == space.count()

    def test_ranked_zonal_count_is_four(self):
        space = RankedZonalSpace(P21)
        msgs = enumerate_messages(space)
        assert len(msgs) == 4 == space.count()
        assert len({m.pairs for m in msgs}) == 4

    def test_enumeration_order_is_stable(self):
        space = RankedZonalSpace(P21)
        first = [sorted(m.pairs) for m in enumerate_messages(space)]
        second = [sorted(m.pairs) for m in enumerate_messages(space)]
        assert first == second

    def test_cap_reports_would_be_count(self):
        space = CompleteSpace(frozenset(f"s{i}" for i in range(1, 8)))
        with pytest.raises(EnumerationCapError) as err:
            enumerate_messages(space)
        assert err.value.count == 5040
        assert err.value.cap == 6

    def test_cap_override(self):
        space = ZonalSpace(Partition.of([[f"s{i}"] for i in range(1, 8)]))
        msgs = enumerate_messages(space, max_states=7)
        assert msgs == [empty_message([f"s{i}" for i in range(1, 8)])]

    def test_explicit_space_keeps_given_order(self):
        a = validate_message([("s1", "s2")], {"s1", "s2"})
        b = validate_message([("s2", "s1")], {"s1", "s2"})
        space = ExplicitSpace(frozenset({"s1", "s2"}), (b, a))
        assert enumerate_messages(space) == [b, a]


class TestRecovery:
    def test_zone_orders_roundtrip(self):
        m = ranked_zonal_message(P21, [("s2", "s1"), ("s3",)], ZoneRanking((1, 0)))
        assert zone_orders_of(m, P21) == (("s2", "s1"), ("s3",))
        assert zone_ranking_of(m, P21) == ZoneRanking((1, 0))

    def test_zonal_message_has_no_ranking(self):
        m = zonal_message(P21, [("s1", "s2"), ("s3",)])
        with pytest.raises(SpaceError):
            zone_ranking_of(m, P21)

    def test_containment(self):
        zonal = ZonalSpace(P21)
        ranked = RankedZonalSpace(P21)
        m_zonal = zonal_message(P21, [("s1", "s2"), ("s3",)])
        m_ranked = ranked_zonal_message(P21, [("s1", "s2"), ("s3",)], ZoneRanking((0, 1)))
        assert zonal.contains(m_zonal) and not zonal.contains(m_ranked)
        assert ranked.contains(m_ranked) and not ranked.contains(m_zonal)


class TestRichness:
    def test_complete_space_is_rich(self):
        ok, witness = check_richness(CompleteSpace(frozenset(S := {"s1", "s2", "s3"})))
        assert ok and witness is None

    def test_zonal_space_is_rich(self):
        ok, witness = check_richness(ZonalSpace(P21))
        assert ok and witness is None

    def test_ranked_zonal_space_is_not_rich(self):
        ok, witness = check_richness(RankedZonalSpace(P12))
        assert not ok
        message, pair = witness
        # The irreversible pair crosses zones: the zone ranking pins it.
        assert P12.zone_of(pair[0]) != P12.zone_of(pair[1])
        assert pair in message.pairs

    def test_ranked_zonal_not_rich_either_orientation(self):
        ok, witness = check_richness(RankedZonalSpace(P21))
        assert not ok
        _, pair = witness
        assert P21.zone_of(pair[0]) != P21.zone_of(pair[1])

    def test_explicit_gap_is_caught(self):
        u = frozenset({"s1", "s2"})
        only = validate_message([("s1", "s2")], u)
        ok, witness = check_richness(ExplicitSpace(u, (only,)))
        assert not ok
        assert witness[1] == ("s1", "s2")

    def test_silent_space_is_rich(self):
        u = frozenset({"s1", "s2"})
        ok, _ = check_richness(ExplicitSpace(u, (empty_message(u),)))
        assert ok


class TestTruthfulMessages:
    def test_unique_truthful_zonal_message(self):
        space = ZonalSpace(P21)
        p = PreferenceOrder(("s2", "s3", "s1"))
        found = truthful_messages(space, p)
        assert found == [truthful_zonal_message(P21, p)]
        assert found[0].pairs == {("s2", "s1")}

    def test_ranked_zonal_truthful_counts(self):
        space = RankedZonalSpace(P21)
        # Top preference inside the top zone: the zone ranking is forced.
        assert len(truthful_messages(space, PreferenceOrder(("s1", "s2", "s3")))) == 1
        assert len(truthful_messages(space, PreferenceOrder(("s3", "s2", "s1")))) == 1
        # s2 > s3 > s1 admits both zone rankings.
        two = truthful_messages(space, PreferenceOrder(("s2", "s3", "s1")))
        assert len(two) == 2
        assert {frozenset(m.pairs) for m in two} == {
            frozenset({("s2", "s1"), ("s2", "s3")}),
            frozenset({("s2", "s1"), ("s3", "s1")}),
        }

    def test_truthful_ranked_zonal_for_top_zone_preference(self):
        space = RankedZonalSpace(P21)
        found = truthful_messages(space, PreferenceOrder(("s3", "s2", "s1")))
        assert found[0].pairs == {("s2", "s1"), ("s3", "s1")}


class TestInducedPartition:
    def test_groups_by_signature(self):
        bounds = UpperBoundSystem.of(
            [
                UpperBound.of(["t1"], ["s1", "s2"], 2),
                UpperBound.of(["t1", "t2"], ["s2", "s3"], 5),
            ]
        )
        part = induced_partition(bounds, "t1", ["s1", "s2", "s3", "s4"])
        assert part.zones == (
            frozenset({"s1"}),
            frozenset({"s2"}),
            frozenset({"s3"}),
            frozenset({"s4"}),
        )
        part2 = induced_partition(bounds, "t2", ["s1", "s2", "s3", "s4"])
        assert part2.zones == (frozenset({"s1", "s4"}), frozenset({"s2", "s3"}))

    def test_no_bounds_gives_one_zone(self):
        part = induced_partition(UpperBoundSystem.empty(), "t", ["s1", "s2"])
        assert part.zones == (frozenset({"s1", "s2"}),)

    def test_regional_quota_layout(self):
        # Three own-region ceilings plus one ceiling over all urban states.
        rural = ["s1", "s4", "s7"]
        urban = ["s2", "s3", "s5", "s6", "s8", "s9"]
        regions = [["s1", "s2", "s3"], ["s4", "s5", "s6"], ["s7", "s8", "s9"]]
        bounds = UpperBoundSystem.of(
            [UpperBound.of([str(k + 1)], regions[k], 6) for k in range(3)]
            + [UpperBound.of(["1", "2", "3"], urban, 19)]
        )
        part = induced_partition(bounds, "1", [s for r in regions for s in r])
        assert part.zones == (
            frozenset({"s1"}),
            frozenset({"s2", "s3"}),
            frozenset({"s4", "s7"}),
            frozenset({"s5", "s6", "s8", "s9"}),
        )


zones_strategy = st.integers(2, 3).flatmap(
    lambda n: st.lists(
        st.integers(1, 2), min_size=n, max_size=n
    ).map(
        lambda sizes: Partition.of(
            [
                [f"s{sum(sizes[:k]) + i + 1}" for i in range(sz)]
                for k, sz in enumerate(sizes)
            ]
        )
    )
)


@settings(max_examples=40, deadline=None)
@given(zones_strategy)
def test_zonal_messages_compare_exactly_within_zones(partition):
    space = ZonalSpace(partition)
    for m in space.enumerate(max_states=8):
        for a in partition.universe:
            for b in partition.universe:
                same_zone = partition.zone_of(a) == partition.zone_of(b)
                assert comparable(a, b, m) == (same_zone or a == b)


@settings(max_examples=40, deadline=None)
@given(zones_strategy)
def test_ranked_zonal_cross_pair_count(partition):
    space = RankedZonalSpace(partition)
    n_zones = len(partition.zones)
    for m in space.enumerate(max_states=8):
        cross = [
            p for p in m.pairs if partition.zone_of(p[0]) != partition.zone_of(p[1])
        ]
        assert len(cross) == n_zones * (n_zones - 1) // 2


@settings(max_examples=40, deadline=None)
@given(zones_strategy, st.randoms())
def test_truthful_messages_exist_for_zonal_spaces(partition, rng):
    space = ZonalSpace(partition)
    ranking = sorted(partition.universe)
    rng.shuffle(ranking)
    assert truthful_messages(space, PreferenceOrder(tuple(ranking)))


@settings(max_examples=30, deadline=None)
@given(zones_strategy)
def test_induced_partition_signature_uniform(partition):
    # Build a bound per zone; the induced partition must regroup the zones.
    from fairalloc.constraints import signature

    bounds = UpperBoundSystem.of(
        [
            UpperBound.of(["t"], sorted(zone), 1 + k)
            for k, zone in enumerate(partition.zones)
        ]
    )
    induced = induced_partition(bounds, "t", partition.universe)
    for zone in induced.zones:
        sigs = {signature(bounds, s, "t") for s in zone}
        assert len(sigs) == 1
