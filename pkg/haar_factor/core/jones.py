"""
Families of interval collections and Jones' compatibility conditions.

A family assigns to each index interval I a finite collection 𝓑_I. Members
are dyadic intervals, or finite unions of them (``DyadicSet``) for the
selector families used in reiteration. The checker reports violations as
data; only precondition failures raise.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .dyadic import DyadicInterval, DyadicSet, dyadic_tree
from .errors import InputFormatError, PreconditionError
from ..utils.workers import parallel_map

Member = Union[DyadicInterval, DyadicSet]


def member_set(member: Member) -> DyadicSet:
    if isinstance(member, DyadicSet):
        return member
    return DyadicSet.of(member)


def member_measure(member: Member) -> Fraction:
    return member.measure


class IntervalFamily:
    """The family (𝓑_I : I ∈ 𝓘) with cached union sets B_I."""

    def __init__(self, blocks: Mapping[DyadicInterval, Iterable[Member]]):
        self._blocks: Dict[DyadicInterval, Tuple[Member, ...]] = {}
        for index in sorted(blocks):
            members = tuple(blocks[index])
            self._blocks[index] = tuple(sorted(members, key=_member_key))
        self._unions: Dict[DyadicInterval, DyadicSet] = {}

    @classmethod
    def identity(cls, depth: int) -> "IntervalFamily":
        return cls({i: (i,) for i in dyadic_tree(depth)})

    @property
    def index_set(self) -> List[DyadicInterval]:
        return list(self._blocks)

    @property
    def blocks(self) -> Dict[DyadicInterval, Tuple[Member, ...]]:
        return dict(self._blocks)

    def members(self, index: DyadicInterval) -> Tuple[Member, ...]:
        return self._blocks[index]

    def all_members(self) -> List[Member]:
        return [m for members in self._blocks.values() for m in members]

    def union_set(self, index: DyadicInterval) -> DyadicSet:
        """B_I, the union of the members of 𝓑_I."""
        cached = self._unions.get(index)
        if cached is None:
            intervals: List[DyadicInterval] = []
            for member in self._blocks[index]:
                intervals.extend(member_set(member).components)
            cached = DyadicSet(intervals)
            self._unions[index] = cached
        return cached

    def is_interval_family(self) -> bool:
        return all(isinstance(m, DyadicInterval) for m in self.all_members())

    def __contains__(self, index: object) -> bool:
        return index in self._blocks

    def __len__(self) -> int:
        return len(self._blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalFamily):
            return NotImplemented
        return self._blocks == other._blocks

    __hash__ = None

    def __repr__(self) -> str:
        size = sum(len(m) for m in self._blocks.values())
        return f"IntervalFamily(indices={len(self._blocks)}, members={size})"

    def to_json(self) -> Dict[str, Any]:
        return {
            "indices": [i.to_json() for i in self._blocks],
            "blocks": {
                str(i.ordering()): [_member_to_json(m) for m in members]
                for i, members in self._blocks.items()
            },
        }

    @classmethod
    def from_json(cls, data: Any) -> "IntervalFamily":
        if not isinstance(data, dict) or not isinstance(data.get("blocks"), dict):
            raise InputFormatError("a family must be an object with a 'blocks' map")
        blocks: Dict[DyadicInterval, List[Member]] = {}
        for key, members in data["blocks"].items():
            index = DyadicInterval.from_json(key)
            if not isinstance(members, list):
                raise InputFormatError(f"block {key!r} must be a list")
            blocks[index] = [_member_from_json(m) for m in members]
        for index in data.get("indices", []):
            index = DyadicInterval.from_json(index)
            blocks.setdefault(index, [])
        return cls(blocks)


def _member_key(member: Member):
    if isinstance(member, DyadicInterval):
        return (member.left, member.n)
    first = member.components[0] if len(member) else None
    return (first.left if first else Fraction(0), first.n if first else 0)


def _member_to_json(member: Member) -> Any:
    if isinstance(member, DyadicInterval):
        return member.to_json()
    return {"set": member.to_json()}


def _member_from_json(data: Any) -> Member:
    if isinstance(data, dict) and "set" in data:
        return DyadicSet.from_json(data["set"])
    return DyadicInterval.from_json(data)


@dataclass
class Violation:
    condition: str
    message: str
    witnesses: List[Any] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {"condition": self.condition, "message": self.message, "witnesses": self.witnesses}


@dataclass
class JonesReport:
    """Outcome of ``check_jones``; ``kappa`` is None when (J4) has no finite constant."""

    satisfied: bool
    kappa: Optional[Fraction]
    violations: List[Violation] = field(default_factory=list)
    triples_tested: int = 0
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "satisfied": self.satisfied,
            "kappa": str(self.kappa) if self.kappa is not None else None,
            "violations": [v.to_json() for v in self.violations],
            "triples_tested": self.triples_tested,
            "notes": self.notes,
        }


def _witness(*items: Member) -> List[Any]:
    return [_member_to_json(m) for m in items]


def _check_nested(members: Sequence[Member]) -> List[Violation]:
    violations: List[Violation] = []
    if all(isinstance(m, DyadicInterval) for m in members):
        # sweep: every member must lie inside or to the right of the open ones
        ordered = sorted(set(members), key=_member_key)
        stack: List[DyadicInterval] = []
        for current in ordered:
            while stack and stack[-1].right <= current.left:
                stack.pop()
            if stack and not stack[-1].contains(current):
                violations.append(
                    Violation("J1", "members are neither nested nor disjoint", _witness(stack[-1], current))
                )
            stack.append(current)
        return violations
    sets = list({member_set(m) for m in members})
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            x, y = sets[a], sets[b]
            if not (x.issubset(y) or y.issubset(x) or x.is_disjoint(y)):
                violations.append(Violation("J1", "members are neither nested nor disjoint", _witness(x, y)))
    return violations


def _check_disjoint_within(index: DyadicInterval, members: Sequence[Member]) -> List[Violation]:
    sets = [member_set(m) for m in members]
    violations: List[Violation] = []
    if all(isinstance(m, DyadicInterval) for m in members):
        for x, y in zip(members, members[1:]):
            if not x.is_disjoint(y):
                violations.append(
                    Violation("J2", f"members of the collection of {index} overlap", _witness(index, x, y))
                )
        return violations
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            if not sets[a].is_disjoint(sets[b]):
                violations.append(
                    Violation("J2", f"members of the collection of {index} overlap", _witness(index, sets[a], sets[b]))
                )
    return violations


def _j4_for_index(family: IntervalFamily, index: DyadicInterval) -> Tuple[Optional[Fraction], int, List[Violation]]:
    union = family.union_set(index)
    worst = Fraction(1)
    tested = 0
    violations: List[Violation] = []
    for inner in family.index_set:
        if not index.contains(inner):
            continue
        inner_union = family.union_set(inner)
        for member in family.members(index):
            tested += 1
            if isinstance(member, DyadicInterval):
                overlap = inner_union.intersection_measure(member)
            else:
                overlap = inner_union.intersection(member).measure
            if overlap == 0:
                violations.append(
                    Violation(
                        "J4",
                        f"member of the collection of {index} misses the union for {inner}",
                        _witness(inner, index, member),
                    )
                )
                continue
            ratio = (inner_union.measure * member.measure) / (union.measure * overlap)
            worst = max(worst, ratio)
    return (None if violations else worst), tested, violations


def check_jones(family: IntervalFamily, workers: Optional[int] = None) -> JonesReport:
    """
    Check (J1)-(J4) and report the smallest admissible κ.

    (J4) is tested for index pairs I0 ⊆ I that are both represented in the
    family, together with every member N of 𝓑_I.
    """
    violations: List[Violation] = []
    indices = family.index_set

    for index in indices:
        if not family.members(index):
            violations.append(Violation("J2", f"the collection of {index} is empty", _witness(index)))

    violations.extend(_check_nested(family.all_members()))

    owners: Dict[Member, DyadicInterval] = {}
    for index in indices:
        members = family.members(index)
        violations.extend(_check_disjoint_within(index, members))
        for member in members:
            key = member_set(member)
            previous = owners.get(key)
            if previous is not None and previous != index:
                violations.append(
                    Violation("J2", f"{previous} and {index} share a member", _witness(previous, index, member))
                )
            owners[key] = index

    for a, first in enumerate(indices):
        for second in indices[a + 1:]:
            if not family.members(first) or not family.members(second):
                continue
            x, y = family.union_set(first), family.union_set(second)
            if first.is_disjoint(second):
                if not x.is_disjoint(y):
                    violations.append(
                        Violation("J3", f"unions for disjoint {first} and {second} intersect", _witness(first, second))
                    )
            elif second.contains(first) and not x.issubset(y):
                violations.append(
                    Violation("J3", f"union for {first} is not inside the union for {second}", _witness(first, second))
                )
            elif first.contains(second) and not y.issubset(x):
                violations.append(
                    Violation("J3", f"union for {second} is not inside the union for {first}", _witness(second, first))
                )

    kappa: Optional[Fraction] = None
    tested = 0
    if all(family.members(i) for i in indices):
        results = parallel_map(lambda idx: _j4_for_index(family, idx), indices, workers=workers)
        kappa = Fraction(1)
        for worst, count, found in results:
            tested += count
            violations.extend(found)
            if worst is None:
                kappa = None
            elif kappa is not None:
                kappa = max(kappa, worst)
    else:
        kappa = None

    return JonesReport(
        satisfied=not violations,
        kappa=kappa if not violations else (kappa if not any(v.condition == "J4" for v in violations) else None),
        violations=violations,
        triples_tested=tested,
        notes=["(J4) is restricted to index pairs represented in the family"],
    )


def verify_nesting_consequences(family: IntervalFamily) -> bool:
    """
    Check the consequences of (J1)-(J4) for the union sets.

    (i) the sets B_I are nested, (ii) B_I0 ⊆ B_I exactly when I0 ⊆ I, and
    (iii) each member of 𝓑_I0 sits inside a member of 𝓑_I when I0 ⊆ I.
    (ii) presumes that every represented index has its sibling represented.
    """
    if not check_jones(family).satisfied:
        raise PreconditionError("family does not satisfy Jones' conditions")
    indices = family.index_set
    for first in indices:
        x = family.union_set(first)
        for second in indices:
            if first == second:
                continue
            y = family.union_set(second)
            if not (x.issubset(y) or y.issubset(x) or x.is_disjoint(y)):
                return False
            if x.issubset(y) != second.contains(first):
                return False
            if second.contains(first):
                outer = [member_set(m) for m in family.members(second)]
                for member in family.members(first):
                    inner = member_set(member)
                    if not any(inner.issubset(candidate) for candidate in outer):
                        return False
    return True


def selector_family(base: IntervalFamily, selector: Mapping[DyadicInterval, Iterable[DyadicInterval]]) -> IntervalFamily:
    """The family J ↦ {A_I : I ∈ selector[J]} whose members are the union sets of ``base``."""
    blocks: Dict[DyadicInterval, List[Member]] = {}
    for index, chosen in selector.items():
        members: List[Member] = []
        for source in chosen:
            if source not in base:
                raise PreconditionError(f"selector refers to {source}, which is not indexed by the base family")
            members.append(base.union_set(source))
        blocks[index] = members
    return IntervalFamily(blocks)


def reiterate(
    base: IntervalFamily,
    selector: Mapping[DyadicInterval, Iterable[DyadicInterval]],
    check: bool = True,
) -> IntervalFamily:
    """
    Compose two compatible families: 𝓒_J = ∪{𝓐_I : A_I ∈ 𝓑_J}.

    ``selector`` maps each J to the base indices I whose sets A_I form 𝓑_J.
    The result satisfies (J1)-(J4) with constant at most κ_A · κ_B.
    """
    selector = {j: tuple(chosen) for j, chosen in selector.items()}
    if check:
        base_report = check_jones(base)
        if not base_report.satisfied:
            raise PreconditionError("base family does not satisfy Jones' conditions")
        outer_report = check_jones(selector_family(base, selector))
        if not outer_report.satisfied:
            raise PreconditionError("selector family does not satisfy Jones' conditions")
    blocks: Dict[DyadicInterval, List[Member]] = {}
    for index, chosen in selector.items():
        members: List[Member] = []
        for source in chosen:
            if source not in base:
                raise PreconditionError(f"selector refers to {source}, which is not indexed by the base family")
            members.extend(base.members(source))
        blocks[index] = members
    return IntervalFamily(blocks)
