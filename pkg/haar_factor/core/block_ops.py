"""
Block bases generated by a Jones family, and the operators B, Q and P = BQ.

For a family (𝓑_I) and signs ε the block basis is b_I = Σ_{K∈𝓑_I} ε_K h_K.
B sends h_I to b_I, Q sends f to Σ ⟨f, b_I⟩/‖b_I‖₂² h_I, and Q∘B is the
identity on the span of (h_I : I ∈ 𝓘).
"""

from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .dyadic import DyadicInterval
from .errors import InputFormatError, MissingSignError, PreconditionError
from .haar_space import HaarVector
from .jones import IntervalFamily, check_jones
from .operators import OperatorMatrix


class SignAssignment:
    """Signs ε_K ∈ {+1, −1} on a finite set of intervals."""

    def __init__(self, signs: Optional[Mapping[DyadicInterval, int]] = None):
        clean: Dict[DyadicInterval, int] = {}
        for interval, sign in (signs or {}).items():
            if sign not in (1, -1):
                raise InputFormatError(f"sign of {interval!r} must be +1 or -1, got {sign!r}")
            clean[interval] = int(sign)
        self._signs = clean

    @classmethod
    def all_plus(cls, intervals: Iterable[DyadicInterval]) -> "SignAssignment":
        return cls({i: 1 for i in intervals})

    def sign(self, interval: DyadicInterval) -> int:
        try:
            return self._signs[interval]
        except KeyError:
            raise MissingSignError(f"no sign for {interval}") from None

    __getitem__ = sign

    def get(self, interval: DyadicInterval, default: int = 1) -> int:
        return self._signs.get(interval, default)

    def as_dict(self) -> Dict[DyadicInterval, int]:
        return dict(self._signs)

    def items(self) -> Iterable[Tuple[DyadicInterval, int]]:
        return self._signs.items()

    def times(self, other: Mapping[DyadicInterval, int]) -> "SignAssignment":
        """Pointwise product; intervals missing from ``other`` keep their sign."""
        return SignAssignment({i: s * other.get(i, 1) for i, s in self._signs.items()})

    def __contains__(self, interval: object) -> bool:
        return interval in self._signs

    def __iter__(self) -> Iterator[DyadicInterval]:
        return iter(self._signs)

    def __len__(self) -> int:
        return len(self._signs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignAssignment):
            return NotImplemented
        return self._signs == other._signs

    __hash__ = None

    def __repr__(self) -> str:
        minus = sum(1 for s in self._signs.values() if s < 0)
        return f"SignAssignment(size={len(self._signs)}, negative={minus})"

    def to_json(self) -> List[Dict[str, int]]:
        return [{"n": i.n, "k": i.k, "sign": s} for i, s in sorted(self._signs.items())]

    @classmethod
    def from_json(cls, data: Any) -> "SignAssignment":
        if not isinstance(data, list):
            raise InputFormatError("signs must be a list of {n, k, sign} records")
        signs: Dict[DyadicInterval, int] = {}
        for item in data:
            if not isinstance(item, dict) or "sign" not in item:
                raise InputFormatError(f"bad sign record {item!r}")
            signs[DyadicInterval.from_json(item)] = item["sign"]
        return cls(signs)


class BlockBasis:
    """The vectors b_I^(ε) of a family, with their squared L² norms."""

    def __init__(
        self,
        family: IntervalFamily,
        signs: SignAssignment,
        vectors: Dict[DyadicInterval, HaarVector],
        norms_sq: Dict[DyadicInterval, Fraction],
    ):
        self.family = family
        self.signs = signs
        self.vectors = vectors
        self.norms_sq = norms_sq
        self.indices: List[DyadicInterval] = sorted(vectors)
        self._owner: Dict[DyadicInterval, DyadicInterval] = {
            k: index for index, vector in vectors.items() for k in vector
        }

    def vector(self, index: DyadicInterval) -> HaarVector:
        return self.vectors[index]

    def norm_sq(self, index: DyadicInterval) -> Fraction:
        return self.norms_sq[index]

    def owner(self, interval: DyadicInterval) -> Optional[DyadicInterval]:
        """The index I whose block contains h_interval, if any."""
        return self._owner.get(interval)

    @property
    def depth(self) -> int:
        return max((v.depth for v in self.vectors.values()), default=0)

    def __len__(self) -> int:
        return len(self.indices)

    def __repr__(self) -> str:
        return f"BlockBasis(indices={len(self.indices)}, depth={self.depth})"

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family.to_json(),
            "signs": self.signs.to_json(),
            "norms_sq": {str(i.ordering()): str(self.norms_sq[i]) for i in self.indices},
        }

    @classmethod
    def from_json(cls, data: Any, check: bool = True) -> "BlockBasis":
        if not isinstance(data, dict) or "family" not in data or "signs" not in data:
            raise InputFormatError("a block basis needs 'family' and 'signs'")
        basis = build_block_basis(
            IntervalFamily.from_json(data["family"]), SignAssignment.from_json(data["signs"]), check=check
        )
        for key, value in data.get("norms_sq", {}).items():
            index = DyadicInterval.from_json(key)
            if index in basis.norms_sq and basis.norms_sq[index] != Fraction(str(value)):
                raise InputFormatError(f"stored norm of block {key} does not match its family")
        return basis


def build_block_basis(family: IntervalFamily, signs: SignAssignment, check: bool = True) -> BlockBasis:
    if not family.is_interval_family():
        raise PreconditionError("a block basis needs interval members; reiterate selector families first")
    if check and not check_jones(family).satisfied:
        raise PreconditionError("family does not satisfy Jones' conditions")
    vectors: Dict[DyadicInterval, HaarVector] = {}
    norms: Dict[DyadicInterval, Fraction] = {}
    for index in family.index_set:
        members = family.members(index)
        vectors[index] = HaarVector({k: signs.sign(k) for k in members})
        norms[index] = sum((k.measure for k in members), Fraction(0))
    return BlockBasis(family, signs, vectors, norms)


def embed_B(f: HaarVector, basis: BlockBasis) -> HaarVector:
    """B f = Σ_{I∈𝓘} a_I b_I."""
    result: Dict[DyadicInterval, Fraction] = {}
    for index, value in f.items():
        block = basis.vectors.get(index)
        if block is None:
            continue
        for k, sign in block.items():
            result[k] = value * sign
    return HaarVector(result)


def project_Q(f: HaarVector, basis: BlockBasis) -> HaarVector:
    """Q f = Σ_{I∈𝓘} ⟨f, b_I⟩/‖b_I‖₂² h_I."""
    pairings: Dict[DyadicInterval, Fraction] = {}
    for k, value in f.items():
        index = basis.owner(k)
        if index is None:
            continue
        pairings[index] = pairings.get(index, Fraction(0)) + value * basis.vectors[index].get(k) * k.measure
    return HaarVector({i: p / basis.norms_sq[i] for i, p in pairings.items()})


def projection_P(f: HaarVector, basis: BlockBasis) -> HaarVector:
    return embed_B(project_Q(f, basis), basis)


def unsigned(basis: BlockBasis) -> BlockBasis:
    """The same family with every sign +1."""
    return build_block_basis(basis.family, SignAssignment.all_plus(basis.signs), check=False)


def embedding_matrix(basis: BlockBasis, depth: int) -> OperatorMatrix:
    """B as a matrix on 𝒟^depth: column I carries ε_K in the rows K ∈ 𝓑_I."""
    columns = {index: dict(basis.vectors[index].items()) for index in basis.indices}
    return OperatorMatrix._from_columns(depth, columns, norm_bound=Fraction(1), norm_bound_source="structural")


def quotient_matrix(basis: BlockBasis, depth: int, kappa: Fraction = Fraction(1)) -> OperatorMatrix:
    """Q as a matrix on 𝒟^depth: Q h_K = ε_K |K| / ‖b_I‖₂² · h_I for K ∈ 𝓑_I."""
    columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
    for index in basis.indices:
        norm = basis.norms_sq[index]
        for k, sign in basis.vectors[index].items():
            columns[k] = {index: sign * k.measure / norm}
    return OperatorMatrix._from_columns(depth, columns, norm_bound=kappa, norm_bound_source="structural")
