"""
Seeded test operators on 𝒟^N.

All randomness comes from a counter-based numpy stream keyed by the seed, and
every generated value is a rational with a power-of-two denominator, so the
same spec always yields the same matrix.
"""

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any, Dict, Tuple

import numpy as np

from .dyadic import DEFAULT_DEPTH_BUDGET, DyadicInterval, dyadic_tree, level_grid
from .errors import DepthBudgetError, InputFormatError
from .haar_space import HaarVector
from .operators import OperatorMatrix

KINDS = (
    "identity",
    "scaled_diagonal",
    "random_large_diagonal",
    "haar_multiplier",
    "level_shift",
    "projection_mask",
)


def counter_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass
class GeneratorSpec:
    kind: str
    depth: int
    delta: Fraction = Fraction(1)
    off_diagonal_mass: Fraction = Fraction(0)
    seed: int = 0
    scale: Fraction = Fraction(1)
    bandwidth: int = 1
    mask_level: int = 2
    entries_per_column: int = 2
    denominator_bits: int = 20

    def __post_init__(self):
        try:
            self.delta = Fraction(str(self.delta))
            self.off_diagonal_mass = Fraction(str(self.off_diagonal_mass))
            self.scale = Fraction(str(self.scale))
            self.depth = int(self.depth)
            self.seed = int(self.seed)
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"bad generator field: {e}") from e

    def validate(self, budget: int = DEFAULT_DEPTH_BUDGET):
        if self.kind not in KINDS:
            raise InputFormatError(f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.depth < 0:
            raise InputFormatError(f"depth must be nonnegative, got {self.depth}")
        if self.depth > budget:
            raise DepthBudgetError(f"depth {self.depth} exceeds the depth budget {budget}")
        if self.delta < 0:
            raise InputFormatError(f"delta must be nonnegative, got {self.delta}")
        if self.off_diagonal_mass < 0:
            raise InputFormatError(f"off_diagonal_mass must be nonnegative, got {self.off_diagonal_mass}")
        if not 0 <= self.seed < 1 << 64:
            raise InputFormatError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.bandwidth < 0 or self.entries_per_column < 0:
            raise InputFormatError("bandwidth and entries_per_column must be nonnegative")
        if self.kind == "projection_mask" and not 0 <= self.mask_level <= self.depth:
            raise InputFormatError(f"mask_level must lie in [0, {self.depth}], got {self.mask_level}")
        if not 1 <= self.denominator_bits <= 62:
            raise InputFormatError(f"denominator_bits must lie in [1, 62], got {self.denominator_bits}")

    def to_json(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("delta", "off_diagonal_mass", "scale"):
            data[key] = str(data[key])
        return data

    @classmethod
    def from_json(cls, data: Any) -> "GeneratorSpec":
        if not isinstance(data, dict) or "kind" not in data or "depth" not in data:
            raise InputFormatError("a generator spec needs at least 'kind' and 'depth'")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputFormatError(f"unknown generator fields: {', '.join(sorted(unknown))}")
        return cls(**data)


def _unit(rng: np.random.Generator, bits: int) -> Fraction:
    """A rational in [0, 1] on the grid 2^-bits."""
    return Fraction(int(rng.integers(0, (1 << bits) + 1)), 1 << bits)


def _random_neighbour(
    rng: np.random.Generator, interval: DyadicInterval, depth: int, bandwidth: int
) -> DyadicInterval:
    low, high = max(0, interval.n - bandwidth), min(depth, interval.n + bandwidth)
    n = int(rng.integers(low, high + 1))
    return DyadicInterval(n, int(rng.integers(0, 1 << n)))


def _random_large_diagonal(spec: GeneratorSpec, rng: np.random.Generator) -> OperatorMatrix:
    entries: Dict[Tuple[DyadicInterval, DyadicInterval], Fraction] = {}
    row_mass: Dict[DyadicInterval, Fraction] = {}
    cap = spec.off_diagonal_mass
    share = cap / spec.entries_per_column if spec.entries_per_column else Fraction(0)
    for col in dyadic_tree(spec.depth, budget=spec.depth):
        entries[(col, col)] = spec.delta + _unit(rng, spec.denominator_bits) / 2
        column_mass = Fraction(0)
        for _ in range(spec.entries_per_column):
            row = _random_neighbour(rng, col, spec.depth, spec.bandwidth)
            sign = 1 if rng.integers(0, 2) else -1
            magnitude = share * _unit(rng, spec.denominator_bits)
            if row == col or (row, col) in entries:
                continue
            magnitude = min(magnitude, cap - column_mass, cap - row_mass.get(row, Fraction(0)))
            if magnitude <= 0:
                continue
            entries[(row, col)] = sign * magnitude
            column_mass += magnitude
            row_mass[row] = row_mass.get(row, Fraction(0)) + magnitude
    return OperatorMatrix(spec.depth, entries)


def _haar_multiplier(spec: GeneratorSpec, rng: np.random.Generator) -> OperatorMatrix:
    per_level = []
    for _ in range(spec.depth + 1):
        sign = 1 if rng.integers(0, 2) else -1
        per_level.append(sign * (spec.delta + _unit(rng, spec.denominator_bits)))
    return OperatorMatrix(
        spec.depth, {(i, i): per_level[i.n] for i in dyadic_tree(spec.depth, budget=spec.depth)}
    )


def _level_shift(spec: GeneratorSpec) -> OperatorMatrix:
    """T h_I = δ h_I + mass · h_{left child of I}."""
    entries: Dict[Tuple[DyadicInterval, DyadicInterval], Fraction] = {}
    for interval in dyadic_tree(spec.depth, budget=spec.depth):
        entries[(interval, interval)] = spec.delta
        if interval.n < spec.depth and spec.off_diagonal_mass:
            entries[(interval.halves()[0], interval)] = spec.off_diagonal_mass
    return OperatorMatrix(spec.depth, entries)


def _projection_mask(spec: GeneratorSpec, rng: np.random.Generator) -> OperatorMatrix:
    grid = level_grid(spec.mask_level, budget=spec.depth)
    chosen = {grid[int(p)] for p in rng.permutation(len(grid))[: max(1, len(grid) // 2)]}
    entries = {
        (i, i): 1
        for i in dyadic_tree(spec.depth, budget=spec.depth)
        if i.n >= spec.mask_level and i.ancestor(spec.mask_level) in chosen
    }
    return OperatorMatrix(spec.depth, entries)


def generate(spec: GeneratorSpec, budget: int = DEFAULT_DEPTH_BUDGET) -> OperatorMatrix:
    """Build the matrix a spec describes; its norm bound is recorded as estimated."""
    spec.validate(budget)
    rng = counter_rng(spec.seed)
    if spec.kind == "identity":
        return OperatorMatrix(spec.depth, {(i, i): 1 for i in dyadic_tree(spec.depth, budget=spec.depth)})
    if spec.kind == "scaled_diagonal":
        return OperatorMatrix(spec.depth, {(i, i): spec.scale for i in dyadic_tree(spec.depth, budget=spec.depth)})
    if spec.kind == "random_large_diagonal":
        return _random_large_diagonal(spec, rng)
    if spec.kind == "haar_multiplier":
        return _haar_multiplier(spec, rng)
    if spec.kind == "level_shift":
        return _level_shift(spec)
    return _projection_mask(spec, rng)


def adjoint_column(T: OperatorMatrix, b: HaarVector) -> HaarVector:
    """c with c_I = ⟨T h_I, b⟩ / |I|, so that ⟨T f, b⟩ = ⟨f, c⟩."""
    return T.adjoint_column(b)
