import pytest
from hypothesis import given, strategies as st

from kdpmac import example
from kdpmac.family import (
    BlockFamily,
    FamilyError,
    build_block_family,
    build_ssets,
    format_sset_table,
    parse_sizes,
    parse_sset_table,
    validate_family,
)
from kdpmac.hierarchy import Hierarchy, dominates, incomparable, leaves_to_root_order

from .conftest import DIAMOND, hierarchies


def test_paper_family():
    fam = build_block_family(7, (2, 2, 1, 3, 2, 3, 2))
    assert fam.ground_size == 15
    assert [set(b) for b in fam.blocks] == [
        {1, 2}, {3, 4}, {5}, {6, 7, 8}, {9, 10}, {11, 12, 13}, {14, 15},
    ]
    assert validate_family(fam).valid


def test_trivial_families():
    assert build_block_family(1, [1]) == BlockFamily(1, (frozenset({1}),))
    fam = build_block_family(3, [1, 1, 1])
    assert fam.blocks == (frozenset({1}), frozenset({2}), frozenset({3}))
    assert build_block_family(3).ground_size == 6


@pytest.mark.parametrize("sizes", [[0, 1], [1, -2]])
def test_nonpositive_size_rejected(sizes):
    with pytest.raises(FamilyError):
        build_block_family(2, sizes)


def test_containment_fails_two_checks():
    r = validate_family(BlockFamily.from_blocks([{1}, {1, 2}]))
    assert not r.antichain and not r.disjoint and r.nonempty
    assert not r.valid


def test_overlap_without_containment():
    r = validate_family(BlockFamily.from_blocks([{1, 2}, {2, 3}]))
    assert not r.disjoint and r.antichain and r.nonempty


def test_empty_block_reported():
    r = validate_family(BlockFamily(3, (frozenset({1}), frozenset())))
    assert not r.nonempty and not r.valid


def test_parse_sizes():
    assert parse_sizes("paper", 7) == [2, 2, 1, 3, 2, 3, 2]
    assert parse_sizes("uniform:3", 2) == [3, 3]
    assert parse_sizes("1,2", 2) == [1, 2]
    for bad in ("paper", "1,x", "uniform:q"):
        with pytest.raises(FamilyError):
            parse_sizes(bad, 3)


def test_paper_ssets(fig1):
    s = build_ssets(fig1, build_block_family(7, example.SIZES))
    assert {u: set(s.of(u)) for u in fig1.users} == example.PRINTED_SSETS
    assert s.total_size() == 38


def test_single_user_sset():
    h = Hierarchy(1, frozenset())
    fam = build_block_family(1, [2])
    assert build_ssets(h, fam).of(1) == fam.block(1)


def test_diamond_ssets():
    s = build_ssets(DIAMOND, build_block_family(4, [1, 1, 1, 1]))
    assert [set(x) for x in s.ssets] == [{1, 2, 3, 4}, {2, 4}, {3, 4}, {4}]
    assert s.of(2) & s.of(3) == {4}
    assert incomparable(DIAMOND, 2, 3)


def test_block_count_mismatch(fig1):
    with pytest.raises(FamilyError):
        build_ssets(fig1, build_block_family(3, [1, 1, 1]))


def test_bad_order_rejected(fig1):
    fam = build_block_family(7, example.SIZES)
    with pytest.raises(FamilyError, match="before its subordinate"):
        build_ssets(fig1, fam, order=[1, 2, 3, 4, 5, 6, 7])


def test_sset_table_file_roundtrip(fig1):
    fam = build_block_family(7, example.SIZES)
    s = build_ssets(fig1, fam)
    assert parse_sset_table(format_sset_table(fam, s)) == (fam, s)


@given(hierarchies(max_users=14), st.data())
def test_sset_properties(h, data):
    sizes = data.draw(st.lists(st.integers(1, 3), min_size=h.user_count, max_size=h.user_count))
    fam = build_block_family(h.user_count, sizes)
    s = build_ssets(h, fam)
    for u in h.users:
        if not h.subordinates(u):
            assert s.of(u) == fam.block(u)
    for i in h.users:
        for j in h.users:
            if i != j:
                assert (s.of(j) < s.of(i)) == dominates(h, i, j)
                assert s.of(i) != s.of(j)
                if h.is_tree() and incomparable(h, i, j):
                    assert not s.of(i) & s.of(j)


@given(hierarchies(max_users=14), st.randoms(use_true_random=False))
def test_sset_independent_of_order(h, rnd):
    fam = build_block_family(h.user_count)
    base = build_ssets(h, fam)
    # random valid linearisation: repeatedly take any user whose subordinates are done
    done: list[int] = []
    pending = set(h.users)
    while pending:
        ready = sorted(u for u in pending if h.subordinates(u) <= set(done))
        pick = rnd.choice(ready)
        done.append(pick)
        pending.remove(pick)
    assert build_ssets(h, fam, order=done) == base
    assert build_ssets(h, fam, order=leaves_to_root_order(h)) == base
