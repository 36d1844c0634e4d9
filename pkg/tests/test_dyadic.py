"""Tests for dyadic intervals, level grids and canonical dyadic sets."""

from fractions import Fraction

import pytest

from haar_factor.core.dyadic import (
    ROOT,
    DyadicInterval,
    DyadicSet,
    Relation,
    dyadic_tree,
    level_grid,
    tail_collection,
)
from haar_factor.core.errors import DepthBudgetError, InputFormatError, InvalidIntervalError


def test_ordering_examples():
    assert ROOT.ordering() == 0
    assert DyadicInterval(1, 1).ordering() == 2
    assert DyadicInterval(2, 0).ordering() == 3
    assert DyadicInterval.from_ordering(6) == DyadicInterval(2, 3)


def test_ordering_is_a_bijection_on_the_tree():
    tree = dyadic_tree(6)
    assert [i.ordering() for i in tree] == list(range(2 ** 7 - 1))
    assert all(DyadicInterval.from_ordering(i.ordering()) == i for i in tree)
    assert tree == sorted(tree)


def test_invalid_intervals_are_rejected():
    with pytest.raises(InvalidIntervalError):
        DyadicInterval(-1, 0)
    with pytest.raises(InvalidIntervalError):
        DyadicInterval(1, 2)
    with pytest.raises(InvalidIntervalError):
        DyadicInterval(1.0, 0)
    with pytest.raises(InvalidIntervalError):
        DyadicInterval.from_ordering(-1)


def test_interval_is_immutable_and_hashable():
    interval = DyadicInterval(3, 5)
    with pytest.raises(AttributeError):
        interval.n = 4
    assert {interval: 1}[DyadicInterval(3, 5)] == 1


def test_endpoints_and_measure():
    interval = DyadicInterval(3, 5)
    assert interval.left == Fraction(5, 8)
    assert interval.right == Fraction(3, 4)
    assert interval.measure == Fraction(1, 8)


def test_halves_partition_their_parent():
    for interval in dyadic_tree(5):
        left, right = interval.halves()
        assert left.measure + right.measure == interval.measure
        assert left.left == interval.left and right.right == interval.right
        assert left.right == right.left
        assert left.parent() == interval == right.parent()
        assert left.is_left_child() and not right.is_left_child()
    assert ROOT.parent() is None


def test_relation_matches_endpoint_comparison():
    tree = dyadic_tree(6)
    for a in tree:
        for b in tree:
            if (a.left, a.right) == (b.left, b.right):
                expected = Relation.EQUAL
            elif b.left <= a.left and a.right <= b.right:
                expected = Relation.SUBSET
            elif a.left <= b.left and b.right <= a.right:
                expected = Relation.SUPERSET
            else:
                assert a.right <= b.left or b.right <= a.left
                expected = Relation.DISJOINT
            assert a.relation(b) == expected


def test_ancestor_and_descendants():
    leaf = DyadicInterval(3, 5)
    assert leaf.ancestor(1) == DyadicInterval(1, 1)
    assert leaf.ancestor(3) == leaf
    assert DyadicInterval(1, 1).descendants_at(2) == [DyadicInterval(2, 2), DyadicInterval(2, 3)]
    with pytest.raises(InvalidIntervalError):
        leaf.ancestor(4)
    with pytest.raises(InvalidIntervalError):
        leaf.descendants_at(2)


def test_level_grid_and_budget():
    assert level_grid(0) == [ROOT]
    assert level_grid(1) == [DyadicInterval(1, 0), DyadicInterval(1, 1)]
    assert all(i.measure == Fraction(1, 4) for i in level_grid(2))
    assert sum(i.measure for i in level_grid(7)) == 1
    with pytest.raises(DepthBudgetError):
        level_grid(5, budget=4)
    with pytest.raises(InvalidIntervalError):
        level_grid(-1)
    with pytest.raises(DepthBudgetError):
        dyadic_tree(17)


def test_tail_collection():
    assert tail_collection(0, 1) == [DyadicInterval(1, 0)]
    assert tail_collection(1, 3) == [DyadicInterval(2, 2), DyadicInterval(3, 4), DyadicInterval(3, 5)]
    assert tail_collection(2, 2) == []


def test_interval_json():
    interval = DyadicInterval(2, 3)
    assert DyadicInterval.from_json(interval.to_json()) == interval
    assert DyadicInterval.from_json(6) == interval
    assert DyadicInterval.from_json("6") == interval
    for bad in (True, "x", {"n": 1}, [1, 0], {"n": 1, "k": 5}):
        with pytest.raises(InputFormatError):
            DyadicInterval.from_json(bad)


def test_dyadic_set_canonical_form():
    halves = DyadicSet([DyadicInterval(1, 0), DyadicInterval(1, 1)])
    assert halves == DyadicSet.of(ROOT)
    assert halves.components == (ROOT,)

    nested = DyadicSet([DyadicInterval(1, 0), DyadicInterval(2, 1), DyadicInterval(3, 6)])
    assert nested.components == (DyadicInterval(1, 0), DyadicInterval(3, 6))
    assert nested.measure == Fraction(5, 8)
    assert DyadicSet().is_empty()
    assert DyadicSet().measure == 0


def test_dyadic_set_operations():
    a = DyadicSet([DyadicInterval(1, 0), DyadicInterval(2, 2)])
    b = DyadicSet([DyadicInterval(2, 1), DyadicInterval(1, 1)])
    assert a.intersection(b) == DyadicSet([DyadicInterval(2, 1), DyadicInterval(2, 2)])
    assert a.intersection_measure(DyadicInterval(1, 1)) == Fraction(1, 4)
    assert a.intersection_measure(DyadicInterval(3, 1)) == Fraction(1, 8)
    assert a.union(b) == DyadicSet.of(ROOT)
    assert not a.is_disjoint(b)
    assert DyadicSet.of(DyadicInterval(2, 0)).issubset(a)
    assert not b.issubset(a)
    assert DyadicSet.of(DyadicInterval(2, 3)).is_disjoint(a)
    assert a.contains_interval(DyadicInterval(3, 4))
    assert not a.contains_interval(DyadicInterval(1, 1))


def test_dyadic_set_measure_matches_leaf_count(rng):
    leaves = level_grid(6)
    for _ in range(50):
        picked = [i for i in dyadic_tree(4) if rng.random() < 0.2]
        covered = {leaf for leaf in leaves if any(p.contains(leaf) for p in picked)}
        assert DyadicSet(picked).measure == Fraction(len(covered), 64)


def test_dyadic_set_json():
    a = DyadicSet([DyadicInterval(1, 0), DyadicInterval(2, 2)])
    assert DyadicSet.from_json(a.to_json()) == a
    with pytest.raises(InputFormatError):
        DyadicSet.from_json({"n": 0, "k": 0})
