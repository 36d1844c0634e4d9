"""
Finitely supported Haar expansions and their SL∞ / H¹ norms.

A ``HaarVector`` stores the coefficients a_I of Σ a_I h_I, where h_I is the
L∞-normalized Haar function of I. SL∞ quantities are kept squared and exact;
only the H¹ norm and the ascent estimator use floating point.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from .dyadic import ROOT, DyadicInterval
from .errors import DepthBudgetError, InputFormatError, InvalidIntervalError

_UNIT_ROUNDOFF = 2.0 ** -53
_TINY = 2.0 ** -1074


class HaarVector:
    """Immutable sparse map interval → nonzero rational coefficient."""

    __slots__ = ("_coeffs", "_depth")

    def __init__(self, coeffs: Optional[Mapping[DyadicInterval, Any]] = None):
        clean: Dict[DyadicInterval, Fraction] = {}
        for interval, value in (coeffs or {}).items():
            if not isinstance(interval, DyadicInterval):
                raise InvalidIntervalError(f"Haar coefficients must be keyed by intervals, got {interval!r}")
            value = Fraction(value)
            if value:
                clean[interval] = value
        self._coeffs = clean
        self._depth = max((i.n for i in clean), default=0)

    @classmethod
    def _wrap(cls, clean: Dict[DyadicInterval, Fraction]) -> "HaarVector":
        # caller guarantees nonzero Fraction values
        vector = cls.__new__(cls)
        vector._coeffs = clean
        vector._depth = max((i.n for i in clean), default=0)
        return vector

    @classmethod
    def zero(cls) -> "HaarVector":
        return cls._wrap({})

    @classmethod
    def basis(cls, interval: DyadicInterval, value: Any = 1) -> "HaarVector":
        return cls({interval: value})

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def support(self) -> List[DyadicInterval]:
        return sorted(self._coeffs)

    def levels(self) -> set:
        return {i.n for i in self._coeffs}

    def get(self, interval: DyadicInterval) -> Fraction:
        return self._coeffs.get(interval, Fraction(0))

    __getitem__ = get

    def items(self) -> Iterable[Tuple[DyadicInterval, Fraction]]:
        return self._coeffs.items()

    def as_dict(self) -> Dict[DyadicInterval, Fraction]:
        return dict(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self) -> Iterator[DyadicInterval]:
        return iter(self._coeffs)

    def __contains__(self, interval: object) -> bool:
        return interval in self._coeffs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HaarVector):
            return NotImplemented
        return self._coeffs == other._coeffs

    __hash__ = None

    def __repr__(self) -> str:
        terms = ", ".join(f"({i.n},{i.k}): {v}" for i, v in sorted(self._coeffs.items()))
        return f"HaarVector({{{terms}}})"

    def __add__(self, other: "HaarVector") -> "HaarVector":
        result = dict(self._coeffs)
        for interval, value in other._coeffs.items():
            total = result.get(interval, 0) + value
            if total:
                result[interval] = total
            else:
                result.pop(interval, None)
        return HaarVector._wrap(result)

    def __neg__(self) -> "HaarVector":
        return HaarVector._wrap({i: -v for i, v in self._coeffs.items()})

    def __sub__(self, other: "HaarVector") -> "HaarVector":
        return self + (-other)

    def scale(self, factor: Any) -> "HaarVector":
        factor = Fraction(factor)
        if not factor:
            return HaarVector.zero()
        return HaarVector._wrap({i: v * factor for i, v in self._coeffs.items()})

    def __mul__(self, factor: Any) -> "HaarVector":
        return self.scale(factor)

    __rmul__ = __mul__

    def restrict(self, intervals: Iterable[DyadicInterval]) -> "HaarVector":
        keep = set(intervals)
        return HaarVector._wrap({i: v for i, v in self._coeffs.items() if i in keep})

    def flip_signs(self, signs: Mapping[DyadicInterval, int]) -> "HaarVector":
        """f^(ε): every coefficient a_I multiplied by ε_I (missing signs count as +1)."""
        return HaarVector._wrap({i: v * signs.get(i, 1) for i, v in self._coeffs.items()})

    def abs(self) -> "HaarVector":
        return HaarVector._wrap({i: abs(v) for i, v in self._coeffs.items()})

    def to_json(self) -> Dict[str, Any]:
        return {
            "coeffs": [
                {"n": i.n, "k": i.k, "value": str(v)} for i, v in sorted(self._coeffs.items())
            ]
        }

    @classmethod
    def from_json(cls, data: Any) -> "HaarVector":
        if not isinstance(data, dict) or not isinstance(data.get("coeffs", []), list):
            raise InputFormatError("a Haar vector must be an object with a 'coeffs' list")
        coeffs: Dict[DyadicInterval, Fraction] = {}
        for entry in data.get("coeffs", []):
            if not isinstance(entry, dict) or "value" not in entry:
                raise InputFormatError(f"bad coefficient entry {entry!r}")
            interval = DyadicInterval.from_json(entry)
            try:
                value = Fraction(str(entry["value"]))
            except (ValueError, ZeroDivisionError) as e:
                raise InputFormatError(f"bad rational {entry['value']!r}") from e
            coeffs[interval] = coeffs.get(interval, Fraction(0)) + value
        return cls(coeffs)


@dataclass(frozen=True)
class LeafProfile:
    """Squared square-function values on the 2^depth leaves, left to right."""

    depth: int
    values: Tuple[Fraction, ...]

    def maximum(self) -> Fraction:
        return max(self.values)

    def to_json(self) -> Dict[str, Any]:
        return {"depth": self.depth, "values": [str(v) for v in self.values]}


@dataclass(frozen=True)
class H1Estimate:
    """Floating point H¹ norm with an absolute error bound."""

    value: float
    error: float

    @property
    def upper(self) -> float:
        return self.value + self.error

    def upper_fraction(self) -> Fraction:
        """Exact rational at or above value + error."""
        return Fraction(self.value) + Fraction(self.error)

    def to_json(self) -> Dict[str, float]:
        return {"value": self.value, "error": self.error}


@dataclass(frozen=True)
class PairingEstimate:
    """Estimate of sup{|⟨f, c⟩| : ‖f‖_SL∞ ≤ 1}."""

    value: float
    error: float = 0.0
    method: str = "h1_bound"
    dual_bound: Optional[float] = None
    iterations: int = 0

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"method": self.method, "value": self.value, "error": self.error}
        if self.dual_bound is not None:
            data["dual_bound"] = self.dual_bound
            data["iterations"] = self.iterations
        return data


def inner_product(f: HaarVector, g: HaarVector) -> Fraction:
    """⟨f, g⟩ = Σ a_I b_I |I|."""
    if len(f) > len(g):
        f, g = g, f
    total = Fraction(0)
    for interval, value in f.items():
        other = g.get(interval)
        if other:
            total += value * other * interval.measure
    return total


def leaf_profile(f: HaarVector, depth: int) -> LeafProfile:
    """Root-to-leaf prefix sums of a_I² over all 2^depth leaves."""
    if depth < f.depth:
        raise DepthBudgetError(f"leaf depth {depth} is smaller than the vector depth {f.depth}")
    values = [f.get(ROOT) ** 2]
    for n in range(1, depth + 1):
        values = [values[k >> 1] + f.get(DyadicInterval(n, k)) ** 2 for k in range(1 << n)]
    return LeafProfile(depth=depth, values=tuple(values))


def square_function_cells(f: HaarVector) -> List[Tuple[DyadicInterval, Fraction]]:
    """
    Partition [0, 1) into maximal dyadic cells on which Σ a_I² h_I² is constant.

    Returns (cell, squared value) pairs. The number of cells is at most
    1 + |support| · (depth + 1).
    """
    if f.is_zero():
        return [(ROOT, Fraction(0))]
    active = set()
    for interval in f:
        node: Optional[DyadicInterval] = interval
        while node is not None and node not in active:
            active.add(node)
            node = node.parent()
    cells: List[Tuple[DyadicInterval, Fraction]] = []
    stack = [(ROOT, Fraction(0))]
    while stack:
        node, acc = stack.pop()
        acc = acc + f.get(node) ** 2
        left, right = node.halves()
        for child in (right, left):
            if child in active:
                stack.append((child, acc))
            else:
                cells.append((child, acc))
    cells.sort(key=lambda cell: cell[0].left)
    return cells


def sl_inf_norm_sq(f: HaarVector) -> Fraction:
    """Squared SL∞ norm: the maximum of the squared square function."""
    return max(value for _, value in square_function_cells(f))


def h1_norm(f: HaarVector) -> H1Estimate:
    """∫ (Σ a_I² h_I²)^{1/2}, with the rounding error of the square roots bounded."""
    terms = [float(cell.measure) * math.sqrt(float(value)) for cell, value in square_function_cells(f)]
    value = math.fsum(terms)
    error = 4.0 * _UNIT_ROUNDOFF * value + len(terms) * _TINY
    return H1Estimate(value=value, error=error)


def rademacher_vector(m: int, coefficients: Mapping[DyadicInterval, Any]) -> HaarVector:
    """r_m^(c) = Σ_{I ∈ 𝒟_m} c_I h_I."""
    for interval in coefficients:
        if interval.n != m:
            raise InvalidIntervalError(f"{interval!r} is not of generation {m}")
    return HaarVector(coefficients)


def project_levels(f: HaarVector, levels: Iterable[int]) -> HaarVector:
    """P_Λ f: keep the coefficients whose generation lies in Λ."""
    keep = set(levels)
    return HaarVector._wrap({i: v for i, v in f.items() if i.n in keep})


def rademacher_pairing_bound(f: HaarVector, m: int) -> Fraction:
    """sup over |c_I| ≤ 1 of ⟨f, r_m^(c)⟩, attained at c_I = sign(a_I)."""
    return sum((abs(v) * i.measure for i, v in f.items() if i.n == m), Fraction(0))


def rademacher_square_sum(f: HaarVector, top_level: int) -> Fraction:
    """Σ_{m ≤ top_level} (Σ_{I ∈ 𝒟_m} |a_I||I|)², bounded by the squared SL∞ norm."""
    per_level: Dict[int, Fraction] = {}
    for interval, value in f.items():
        if interval.n <= top_level:
            per_level[interval.n] = per_level.get(interval.n, Fraction(0)) + abs(value) * interval.measure
    return sum((s * s for s in per_level.values()), Fraction(0))


def naive_stepsize(k: int) -> float:
    return 2.0 / (k + 2.0)


def convex_ascent(c: HaarVector, iterations: int = 500, tolerance: float = 1e-9) -> PairingEstimate:
    """
    Feasible lower bound for sup{⟨f, c⟩ : ‖f‖_SL∞ ≤ 1} by conditional gradient.

    The iterate is a probability measure μ on the square-function cells of c.
    Each μ gives the candidate a_I = w_I / μ(I) (w_I = c_I |I|), which after
    scaling by its SL∞ norm is feasible, and the upper bound
    sqrt(Σ w_I² / μ(I)). The Frank-Wolfe vertex is the cell where the
    candidate's square function peaks.
    """
    if c.is_zero():
        return PairingEstimate(value=0.0, method="convex_ascent", dual_bound=0.0)
    support = c.support
    index = {interval: j for j, interval in enumerate(support)}
    cells = [cell for cell, _ in square_function_cells(c)]
    cell_ids: List[int] = []
    supp_ids: List[int] = []
    for p, cell in enumerate(cells):
        node: Optional[DyadicInterval] = cell.parent()
        while node is not None:
            j = index.get(node)
            if j is not None:
                cell_ids.append(p)
                supp_ids.append(j)
            node = node.parent()
    cell_idx = np.asarray(cell_ids, dtype=np.int64)
    supp_idx = np.asarray(supp_ids, dtype=np.int64)
    weights = np.array([float(c.get(i) * i.measure) for i in support])
    mu = np.array([float(cell.measure) for cell in cells])

    best, dual_best = 0.0, float("inf")
    done = 0
    for k in range(iterations):
        done = k + 1
        mass = np.bincount(supp_idx, weights=mu[cell_idx], minlength=len(support))
        candidate = weights / mass
        profile = np.bincount(cell_idx, weights=candidate[supp_idx] ** 2, minlength=len(cells))
        peak = float(profile.max())
        gain = float(candidate @ weights)
        best = max(best, abs(gain) / math.sqrt(peak))
        dual_best = min(dual_best, math.sqrt(float(np.sum(weights ** 2 / mass))))
        if dual_best - best <= tolerance * dual_best:
            break
        gamma = naive_stepsize(k + 1)
        mu *= 1.0 - gamma
        mu[int(np.argmax(profile))] += gamma
    return PairingEstimate(
        value=best, error=0.0, method="convex_ascent", dual_bound=dual_best, iterations=done
    )


def sup_pairing_over_ball(c: HaarVector, method: str = "h1_bound", iterations: int = 500) -> PairingEstimate:
    """Estimate sup |⟨f, c⟩| over the SL∞ unit ball at depth ≤ depth(c)."""
    if method == "h1_bound":
        estimate = h1_norm(c)
        return PairingEstimate(value=estimate.value, error=estimate.error, method="h1_bound")
    if method == "convex_ascent":
        return convex_ascent(c, iterations=iterations)
    raise ValueError(f"unknown pairing method {method!r}; expected 'h1_bound' or 'convex_ascent'")
