"""
Exact combinatorics of dyadic subintervals of [0, 1).

Intervals are half-open, ``[k 2^-n, (k+1) 2^-n)``, and all measures are exact
``Fraction`` values. A finite union of dyadic intervals is kept as a
``DyadicSet`` in canonical form (sorted, pairwise disjoint, maximal).
"""

from bisect import bisect_left, bisect_right
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import DepthBudgetError, InputFormatError, InvalidIntervalError

DEFAULT_DEPTH_BUDGET = 16


class Relation(str, Enum):
    """Set relation of a first interval to a second one."""

    EQUAL = "equal"
    SUBSET = "subset"
    SUPERSET = "superset"
    DISJOINT = "disjoint"


@total_ordering
class DyadicInterval:
    """
    The dyadic interval ``[k 2^-n, (k+1) 2^-n)``.

    Intervals order by generation, then position, which is the breadth-first
    ordering of the dyadic tree.
    """

    __slots__ = ("n", "k", "_hash")

    def __init__(self, n: int, k: int):
        if not isinstance(n, int) or not isinstance(k, int):
            raise InvalidIntervalError(f"interval indices must be integers, got ({n!r}, {k!r})")
        if n < 0:
            raise InvalidIntervalError(f"generation must be nonnegative, got {n}")
        if not 0 <= k < (1 << n):
            raise InvalidIntervalError(f"position {k} out of range for generation {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_hash", hash((n, k)))

    def __setattr__(self, name: str, value: Any):
        raise AttributeError("DyadicInterval is immutable")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return self.n == other.n and self.k == other.k

    def __lt__(self, other: "DyadicInterval") -> bool:
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return (self.n, self.k) < (other.n, other.k)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"DyadicInterval(n={self.n}, k={self.k})"

    def __str__(self) -> str:
        return f"[{self.left}, {self.right})"

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.n)

    @property
    def left(self) -> Fraction:
        return Fraction(self.k, 1 << self.n)

    @property
    def right(self) -> Fraction:
        return Fraction(self.k + 1, 1 << self.n)

    def ordering(self) -> int:
        """Breadth-first ordering number 2^n - 1 + k."""
        return (1 << self.n) - 1 + self.k

    @classmethod
    def from_ordering(cls, i: int) -> "DyadicInterval":
        """Inverse of ``ordering``."""
        if not isinstance(i, int) or i < 0:
            raise InvalidIntervalError(f"ordering number must be a nonnegative integer, got {i!r}")
        n = (i + 1).bit_length() - 1
        return cls(n, i + 1 - (1 << n))

    def halves(self) -> Tuple["DyadicInterval", "DyadicInterval"]:
        return DyadicInterval(self.n + 1, 2 * self.k), DyadicInterval(self.n + 1, 2 * self.k + 1)

    def parent(self) -> Optional["DyadicInterval"]:
        if self.n == 0:
            return None
        return DyadicInterval(self.n - 1, self.k >> 1)

    def ancestor(self, level: int) -> "DyadicInterval":
        """The unique interval of generation ``level`` containing this one."""
        if not 0 <= level <= self.n:
            raise InvalidIntervalError(f"no ancestor of {self!r} at generation {level}")
        return DyadicInterval(level, self.k >> (self.n - level))

    def is_left_child(self) -> bool:
        return self.n > 0 and self.k % 2 == 0

    def contains(self, other: "DyadicInterval") -> bool:
        """True when ``other`` is a (not necessarily proper) subset."""
        return other.n >= self.n and (other.k >> (other.n - self.n)) == self.k

    def is_disjoint(self, other: "DyadicInterval") -> bool:
        return not (self.contains(other) or other.contains(self))

    def relation(self, other: "DyadicInterval") -> Relation:
        if self == other:
            return Relation.EQUAL
        if other.contains(self):
            return Relation.SUBSET
        if self.contains(other):
            return Relation.SUPERSET
        return Relation.DISJOINT

    def descendants_at(self, level: int) -> List["DyadicInterval"]:
        """All intervals of generation ``level`` inside this one, in position order."""
        if level < self.n:
            raise InvalidIntervalError(f"generation {level} is coarser than {self!r}")
        shift = level - self.n
        start = self.k << shift
        return [DyadicInterval(level, start + j) for j in range(1 << shift)]

    def to_json(self) -> Dict[str, int]:
        return {"n": self.n, "k": self.k}

    @classmethod
    def from_json(cls, data: Any) -> "DyadicInterval":
        """Accepts ``{"n": .., "k": ..}`` or a bare ordering number."""
        if isinstance(data, bool):
            raise InputFormatError(f"not an interval: {data!r}")
        if isinstance(data, int):
            return cls.from_ordering(data)
        if isinstance(data, str) and data.isdigit():
            return cls.from_ordering(int(data))
        if isinstance(data, dict) and "n" in data and "k" in data:
            try:
                return cls(int(data["n"]), int(data["k"]))
            except (TypeError, ValueError) as e:
                raise InputFormatError(f"bad interval {data!r}: {e}") from e
        raise InputFormatError(f"not an interval: {data!r}")


ROOT = DyadicInterval(0, 0)


def ordering(interval: DyadicInterval) -> int:
    return interval.ordering()


def from_ordering(i: int) -> DyadicInterval:
    return DyadicInterval.from_ordering(i)


def halves(interval: DyadicInterval) -> Tuple[DyadicInterval, DyadicInterval]:
    return interval.halves()


def relation(first: DyadicInterval, second: DyadicInterval) -> Relation:
    return first.relation(second)


def level_grid(m: int, budget: int = DEFAULT_DEPTH_BUDGET) -> List[DyadicInterval]:
    """All 2^m intervals of generation m, in position order."""
    if m < 0:
        raise InvalidIntervalError(f"generation must be nonnegative, got {m}")
    if m > budget:
        raise DepthBudgetError(f"generation {m} exceeds the depth budget {budget}")
    return [DyadicInterval(m, k) for k in range(1 << m)]


def dyadic_tree(depth: int, budget: int = DEFAULT_DEPTH_BUDGET) -> List[DyadicInterval]:
    """The intervals of generations 0..depth in ordering order."""
    if depth > budget:
        raise DepthBudgetError(f"depth {depth} exceeds the depth budget {budget}")
    return [DyadicInterval.from_ordering(i) for i in range((1 << (depth + 1)) - 1)]


def tail_collection(k: int, depth: int) -> List[DyadicInterval]:
    """
    Intervals of generation at most ``depth`` inside [1 - 2^-k, 1 - 2^-(k+1)).

    These are the collections whose closed spans decompose the space into
    a direct sum of copies of itself; only the enumeration is provided.
    """
    if k < 0:
        raise InvalidIntervalError(f"k must be nonnegative, got {k}")
    top = DyadicInterval(k + 1, (1 << (k + 1)) - 2)
    result: List[DyadicInterval] = []
    for level in range(top.n, depth + 1):
        result.extend(top.descendants_at(level))
    return result


class DyadicSet:
    """
    A finite union of dyadic intervals in canonical form.

    Components are sorted by left endpoint, pairwise disjoint, and maximal:
    two sibling intervals are always merged into their parent.
    """

    __slots__ = ("_components", "_lefts", "_prefix", "_hash")

    def __init__(self, intervals: Iterable[DyadicInterval] = ()):
        components = _canonicalize(intervals)
        self._components: Tuple[DyadicInterval, ...] = tuple(components)
        self._lefts: List[Fraction] = [c.left for c in components]
        prefix = [Fraction(0)]
        for c in components:
            prefix.append(prefix[-1] + c.measure)
        self._prefix = prefix
        self._hash = hash(self._components)

    @classmethod
    def of(cls, interval: DyadicInterval) -> "DyadicSet":
        return cls((interval,))

    @property
    def components(self) -> Tuple[DyadicInterval, ...]:
        return self._components

    @property
    def measure(self) -> Fraction:
        return self._prefix[-1]

    def is_empty(self) -> bool:
        return not self._components

    def __iter__(self) -> Iterator[DyadicInterval]:
        return iter(self._components)

    def __len__(self) -> int:
        return len(self._components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DyadicSet):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "DyadicSet(" + ", ".join(str(c) for c in self._components) + ")"

    def union(self, other: "DyadicSet") -> "DyadicSet":
        return DyadicSet(self._components + other._components)

    def intersection(self, other: "DyadicSet") -> "DyadicSet":
        result: List[DyadicInterval] = []
        a, b = self._components, other._components
        i = j = 0
        while i < len(a) and j < len(b):
            x, y = a[i], b[j]
            if y.contains(x):
                result.append(x)
                i += 1
            elif x.contains(y):
                result.append(y)
                j += 1
            elif x.left < y.left:
                i += 1
            else:
                j += 1
        return DyadicSet(result)

    def intersection_measure(self, interval: DyadicInterval) -> Fraction:
        """|interval ∩ self| without building the intersection."""
        j = bisect_right(self._lefts, interval.left) - 1
        if j >= 0 and self._components[j].contains(interval):
            return interval.measure
        lo = bisect_left(self._lefts, interval.left)
        hi = bisect_left(self._lefts, interval.right)
        return self._prefix[hi] - self._prefix[lo]

    def contains_interval(self, interval: DyadicInterval) -> bool:
        return self.intersection_measure(interval) == interval.measure

    def issubset(self, other: "DyadicSet") -> bool:
        return all(other.contains_interval(c) for c in self._components)

    def is_disjoint(self, other: "DyadicSet") -> bool:
        if len(self._components) > len(other._components):
            return other.is_disjoint(self)
        return all(other.intersection_measure(c) == 0 for c in self._components)

    def to_json(self) -> List[Dict[str, int]]:
        return [c.to_json() for c in self._components]

    @classmethod
    def from_json(cls, data: Sequence[Any]) -> "DyadicSet":
        if not isinstance(data, (list, tuple)):
            raise InputFormatError(f"a set must be a list of intervals, got {data!r}")
        return cls(DyadicInterval.from_json(item) for item in data)


def _canonicalize(intervals: Iterable[DyadicInterval]) -> List[DyadicInterval]:
    ordered = sorted(intervals, key=lambda c: (c.left, c.n))
    kept: List[DyadicInterval] = []
    for interval in ordered:
        if kept and kept[-1].contains(interval):
            continue
        kept.append(interval)
    merged: List[DyadicInterval] = []
    for interval in kept:
        merged.append(interval)
        while len(merged) >= 2:
            first, second = merged[-2], merged[-1]
            if first.n == second.n and first.n > 0 and first.k % 2 == 0 and second.k == first.k + 1:
                merged[-2:] = [first.parent()]
            else:
                break
    return merged
