"""
Sparse rational operator matrices on the truncated Haar system.
"""

from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, Mapping, Optional, Tuple, Union

from .dyadic import DyadicInterval, dyadic_tree
from .errors import DepthBudgetError, InputFormatError
from .haar_space import HaarVector

Entry = Tuple[DyadicInterval, DyadicInterval]


class OperatorMatrix:
    """
    The matrix (t_{J,I}) of T on 𝒟^N, so that T h_I = Σ_J t_{J,I} h_J.

    Entries are stored column by column; a row index is built on first use.
    Instances are treated as immutable once constructed.
    """

    def __init__(
        self,
        depth: int,
        entries: Optional[Mapping[Entry, Any]] = None,
        norm_bound: Optional[Any] = None,
        norm_bound_source: str = "supplied",
    ):
        if depth < 0:
            raise DepthBudgetError(f"operator depth must be nonnegative, got {depth}")
        self.depth = depth
        self._columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
        self._rows: Optional[Dict[DyadicInterval, Dict[DyadicInterval, Fraction]]] = None
        for (row, col), value in (entries or {}).items():
            self._check(row)
            self._check(col)
            value = Fraction(value)
            if value:
                self._columns.setdefault(col, {})[row] = value
        if norm_bound is None:
            self.norm_bound = self.estimate_norm_bound()
            self.norm_bound_source = "estimated"
        else:
            self.norm_bound = Fraction(norm_bound)
            self.norm_bound_source = norm_bound_source

    @classmethod
    def _from_columns(
        cls,
        depth: int,
        columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]],
        norm_bound: Optional[Fraction] = None,
        norm_bound_source: str = "supplied",
    ) -> "OperatorMatrix":
        matrix = cls(depth, norm_bound=Fraction(0))
        matrix._columns = {c: col for c, col in columns.items() if col}
        if norm_bound is None:
            matrix.norm_bound = matrix.estimate_norm_bound()
            matrix.norm_bound_source = "estimated"
        else:
            matrix.norm_bound = Fraction(norm_bound)
            matrix.norm_bound_source = norm_bound_source
        return matrix

    @classmethod
    def diagonal(
        cls,
        depth: int,
        values: Union[Mapping[DyadicInterval, Any], Callable[[DyadicInterval], Any]],
    ) -> "OperatorMatrix":
        lookup = values if callable(values) else (lambda i: values.get(i, 0))
        columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
        for interval in dyadic_tree(depth, budget=max(depth, 0)):
            value = Fraction(lookup(interval))
            if value:
                columns[interval] = {interval: value}
        bound = max((abs(col[i]) for i, col in columns.items()), default=Fraction(0))
        return cls._from_columns(depth, columns, norm_bound=bound)

    @classmethod
    def identity(cls, depth: int, scale: Any = 1) -> "OperatorMatrix":
        scale = Fraction(scale)
        return cls.diagonal(depth, lambda _: scale)

    @classmethod
    def zero(cls, depth: int) -> "OperatorMatrix":
        return cls._from_columns(depth, {}, norm_bound=Fraction(0))

    def _check(self, interval: DyadicInterval):
        if not isinstance(interval, DyadicInterval):
            raise InputFormatError(f"matrix indices must be intervals, got {interval!r}")
        if interval.n > self.depth:
            raise DepthBudgetError(f"{interval!r} lies outside 𝒟^{self.depth}")

    def entry(self, row: DyadicInterval, col: DyadicInterval) -> Fraction:
        return self._columns.get(col, {}).get(row, Fraction(0))

    def diagonal_entry(self, interval: DyadicInterval) -> Fraction:
        return self.entry(interval, interval)

    def column(self, col: DyadicInterval) -> Dict[DyadicInterval, Fraction]:
        return self._columns.get(col, {})

    def row(self, row: DyadicInterval) -> Dict[DyadicInterval, Fraction]:
        if self._rows is None:
            rows: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
            for col, entries in self._columns.items():
                for r, value in entries.items():
                    rows.setdefault(r, {})[col] = value
            self._rows = rows
        return self._rows.get(row, {})

    def entries(self) -> Iterator[Tuple[DyadicInterval, DyadicInterval, Fraction]]:
        for col in sorted(self._columns):
            for row in sorted(self._columns[col]):
                yield row, col, self._columns[col][row]

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self._columns.values())

    def is_diagonal(self) -> bool:
        return all(set(entries) <= {col} for col, entries in self._columns.items())

    def column_off_diagonal_mass(self, col: DyadicInterval) -> Fraction:
        return sum((abs(v) for r, v in self.column(col).items() if r != col), Fraction(0))

    def row_off_diagonal_mass(self, row: DyadicInterval) -> Fraction:
        return sum((abs(v) for c, v in self.row(row).items() if c != row), Fraction(0))

    def estimate_norm_bound(self) -> Fraction:
        """max |t_{I,I}| + (N + 1) · max column off-diagonal mass."""
        diag = max((abs(self.diagonal_entry(c)) for c in self._columns), default=Fraction(0))
        off = max((self.column_off_diagonal_mass(c) for c in self._columns), default=Fraction(0))
        return diag + (self.depth + 1) * off

    def total_mass(self) -> Fraction:
        """Σ |t_{J,I}|, a crude but rigorous bound on the SL∞ operator norm."""
        return sum((abs(v) for col in self._columns.values() for v in col.values()), Fraction(0))

    def apply(self, f: HaarVector) -> HaarVector:
        """T f, exactly."""
        if f.depth > self.depth and not f.is_zero():
            raise DepthBudgetError(f"vector of depth {f.depth} exceeds operator depth {self.depth}")
        result: Dict[DyadicInterval, Fraction] = {}
        for col, coefficient in f.items():
            for row, value in self._columns.get(col, {}).items():
                result[row] = result.get(row, 0) + value * coefficient
        return HaarVector({i: v for i, v in result.items() if v})

    def pairing(self, col: DyadicInterval, b: HaarVector) -> Fraction:
        """⟨T h_col, b⟩."""
        total = Fraction(0)
        for row, value in self._columns.get(col, {}).items():
            coefficient = b.get(row)
            if coefficient:
                total += value * coefficient * row.measure
        return total

    def adjoint_column(self, b: HaarVector) -> HaarVector:
        """The vector c with c_I = ⟨T h_I, b⟩ / |I|, so ⟨T f, b⟩ = ⟨f, c⟩."""
        result: Dict[DyadicInterval, Fraction] = {}
        for row, coefficient in b.items():
            weight = coefficient * row.measure
            for col, value in self.row(row).items():
                result[col] = result.get(col, 0) + value * weight / col.measure
        return HaarVector({i: v for i, v in result.items() if v})

    def compose(self, other: "OperatorMatrix") -> "OperatorMatrix":
        """self ∘ other."""
        depth = max(self.depth, other.depth)
        columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
        for col, entries in other._columns.items():
            acc: Dict[DyadicInterval, Fraction] = {}
            for mid, b in entries.items():
                for row, a in self._columns.get(mid, {}).items():
                    acc[row] = acc.get(row, 0) + a * b
            acc = {r: v for r, v in acc.items() if v}
            if acc:
                columns[col] = acc
        return OperatorMatrix._from_columns(depth, columns, norm_bound=self.norm_bound * other.norm_bound)

    def _combine(self, other: "OperatorMatrix", sign: int) -> "OperatorMatrix":
        depth = max(self.depth, other.depth)
        columns = {c: dict(col) for c, col in self._columns.items()}
        for col, entries in other._columns.items():
            target = columns.setdefault(col, {})
            for row, value in entries.items():
                total = target.get(row, 0) + sign * value
                if total:
                    target[row] = total
                else:
                    target.pop(row, None)
        return OperatorMatrix._from_columns(depth, columns, norm_bound=self.norm_bound + other.norm_bound)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._combine(other, -1)

    def scale(self, factor: Any) -> "OperatorMatrix":
        factor = Fraction(factor)
        columns = {c: {r: v * factor for r, v in col.items()} for c, col in self._columns.items()} if factor else {}
        return OperatorMatrix._from_columns(self.depth, columns, norm_bound=abs(factor) * self.norm_bound)

    def identity_minus(self) -> "OperatorMatrix":
        """Id - T on 𝒟^N."""
        return OperatorMatrix.identity(self.depth) - self

    def with_norm_bound(self, bound: Any, source: str = "supplied") -> "OperatorMatrix":
        return OperatorMatrix._from_columns(self.depth, self._columns, norm_bound=Fraction(bound), norm_bound_source=source)

    def flip_columns(self, signs: Mapping[DyadicInterval, int]) -> "OperatorMatrix":
        """T M_σ with M_σ h_I = σ_I h_I: t'_{J,I} = t_{J,I} σ_I. M_σ is an SL∞ isometry."""
        columns = {
            c: {r: v * signs.get(c, 1) for r, v in col.items()}
            for c, col in self._columns.items()
        }
        return OperatorMatrix._from_columns(
            self.depth, columns, norm_bound=self.norm_bound, norm_bound_source=self.norm_bound_source
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self._columns == other._columns

    __hash__ = None

    def __repr__(self) -> str:
        return f"OperatorMatrix(depth={self.depth}, nnz={self.nnz}, norm_bound={self.norm_bound})"

    def to_json(self) -> Dict[str, Any]:
        return {
            "depth": self.depth,
            "norm_bound": str(self.norm_bound),
            "norm_bound_source": self.norm_bound_source,
            "entries": [
                {"row": row.to_json(), "col": col.to_json(), "value": str(value)}
                for row, col, value in self.entries()
            ],
        }

    @classmethod
    def from_json(cls, data: Any) -> "OperatorMatrix":
        if not isinstance(data, dict) or "depth" not in data:
            raise InputFormatError("an operator must be an object with 'depth' and 'entries'")
        entries: Dict[Entry, Fraction] = {}
        try:
            depth = int(data["depth"])
            for item in data.get("entries", []):
                key = (DyadicInterval.from_json(item["row"]), DyadicInterval.from_json(item["col"]))
                entries[key] = entries.get(key, Fraction(0)) + Fraction(str(item["value"]))
            norm_bound = data.get("norm_bound")
            norm_bound = Fraction(str(norm_bound)) if norm_bound is not None else None
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"malformed operator entry: {e}") from e
        return cls(
            depth,
            entries,
            norm_bound=norm_bound,
            norm_bound_source=data.get("norm_bound_source", "supplied"),
        )
