"""
Quasi-diagonalization of operators with large diagonal.

The construction walks the index intervals in ordering order. Step i picks a
frequency m_i from the surviving level set Λ_i, covers the relevant halves of
the parent's blocks by level-m_i intervals, fixes signs on that cover so the
diagonal stays large, and then sieves the levels above m_i so that later
blocks barely interact with b_i. Every inequality the construction relies on
is recorded in a ``DiagonalizationCertificate`` that can be replayed against
the operator alone.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .block_ops import BlockBasis, SignAssignment, build_block_basis
from .dyadic import ROOT, DyadicInterval, dyadic_tree
from .errors import DepthBudgetError, InfeasibleWithinDepth, InputFormatError, PreconditionError
from .haar_space import (
    H1Estimate,
    HaarVector,
    convex_ascent,
    h1_norm,
    inner_product,
    project_levels,
    sl_inf_norm_sq,
)
from .jones import IntervalFamily, check_jones
from .operators import OperatorMatrix
from .trace import ConstructionTrace, note
from ..utils.workers import parallel_map

LEFT = "left"
RIGHT = "right"


def decompose_column(T: OperatorMatrix, interval: DyadicInterval) -> Tuple[Fraction, HaarVector]:
    """T h_I = α_I h_I + r_I."""
    if interval.n > T.depth:
        raise DepthBudgetError(f"{interval} lies outside the operator depth {T.depth}")
    column = T.column(interval)
    alpha = column.get(interval, Fraction(0))
    return alpha, HaarVector({row: value for row, value in column.items() if row != interval})


def normalize_diagonal_signs(T: OperatorMatrix, delta: Any = 0) -> Tuple[OperatorMatrix, SignAssignment]:
    """
    Return T·M_σ with σ_I = sign t_{I,I}, so the new diagonal is |t_{I,I}|.

    The sign record lists only the flipped intervals (σ_I = −1).
    """
    delta = Fraction(delta)
    flips: Dict[DyadicInterval, int] = {}
    for interval in dyadic_tree(T.depth, budget=T.depth):
        alpha = T.diagonal_entry(interval)
        if abs(alpha) < delta:
            raise PreconditionError(f"|t_II| = {abs(alpha)} is below δ = {delta} at {interval}")
        if alpha < 0:
            flips[interval] = -1
    if not flips:
        return T, SignAssignment()
    return T.flip_columns(flips), SignAssignment(flips)


def gamlen_gaudet_children(
    parent_blocks: Sequence[DyadicInterval], side: str, m: int
) -> List[DyadicInterval]:
    """All level-m intervals inside the left (or right) halves of the parent blocks."""
    if side not in (LEFT, RIGHT):
        raise PreconditionError(f"side must be '{LEFT}' or '{RIGHT}', got {side!r}")
    parents = sorted(parent_blocks, key=lambda p: p.left)
    for first, second in zip(parents, parents[1:]):
        if not first.is_disjoint(second):
            raise PreconditionError(f"parent blocks {first} and {second} overlap")
    chosen = [p.halves()[0 if side == LEFT else 1] for p in parents]
    cover: List[DyadicInterval] = []
    for half in chosen:
        if m < half.n:
            raise PreconditionError(f"level {m} cannot cover {half} exactly")
        cover.extend(half.descendants_at(m))
    return sorted(cover)


def choose_signs(T: OperatorMatrix, F: Sequence[DyadicInterval]) -> SignAssignment:
    """
    Fix ε on F one interval at a time (ordering order) so that the conditional
    average of X(ε) = Σ_{K≠L} ε_K ε_L ⟨r_K, h_L⟩ never drops below zero.

    With the earlier signs fixed, only the couplings between the current interval
    and the fixed ones move the average, so ε_p follows the sign of
    Σ_q ε_q (⟨r_p, h_q⟩ + ⟨r_q, h_p⟩); ties go to +1.
    """
    signs: Dict[DyadicInterval, int] = {}
    for p in sorted(F):
        if p.n > T.depth:
            raise DepthBudgetError(f"{p} lies outside the operator depth {T.depth}")
        push = Fraction(0)
        for q, value in T.column(p).items():
            if q != p and q in signs:
                push += signs[q] * value * q.measure
        for q, value in T.row(p).items():
            if q != p and q in signs:
                push += signs[q] * value * p.measure
        signs[p] = 1 if push >= 0 else -1
    return SignAssignment(signs)


def sign_objective(T: OperatorMatrix, F: Sequence[DyadicInterval], signs: Mapping[DyadicInterval, int]) -> Fraction:
    """X(ε) = Σ_{K≠L in F} ε_K ε_L ⟨r_K, h_L⟩, exactly."""
    members = set(F)
    total = Fraction(0)
    for p in members:
        for q, value in T.column(p).items():
            if q != p and q in members:
                total += signs[p] * signs[q] * value * q.measure
    return total


@dataclass
class FrequencyChoice:
    level: int
    cover: List[DyadicInterval]
    interaction: Fraction
    scanned: Dict[int, Fraction] = field(default_factory=dict)


def interaction_profile(T: OperatorMatrix, prior_blocks: Sequence[HaarVector]) -> Dict[DyadicInterval, Fraction]:
    """A_K = Σ_j |(T b_j)_K|."""
    profile: Dict[DyadicInterval, Fraction] = {}
    for block in prior_blocks:
        for interval, value in T.apply(block).items():
            profile[interval] = profile.get(interval, Fraction(0)) + abs(value)
    return profile


def select_frequency(
    T: OperatorMatrix,
    prior_blocks: Sequence[HaarVector],
    candidate_levels: Sequence[int],
    cover: Callable[[int], List[DyadicInterval]],
    budget: Any,
    profile: Optional[Mapping[DyadicInterval, Fraction]] = None,
) -> FrequencyChoice:
    """
    Smallest candidate level m with a nonempty exact cover 𝓕_m and

        Σ_{j} Σ_{K∈𝓕_m} |⟨T b_j, h_K⟩| ≤ budget,

    which bounds Σ_j |⟨T b_j, f^(ε)⟩| for every sign choice on 𝓕_m.
    """
    if not candidate_levels:
        raise PreconditionError("select_frequency needs at least one candidate level")
    budget = Fraction(budget)
    if profile is None:
        profile = interaction_profile(T, prior_blocks)
    scanned: Dict[int, Fraction] = {}
    for m in sorted(set(candidate_levels)):
        if m > T.depth:
            continue
        try:
            intervals = cover(m)
        except PreconditionError:
            continue
        if not intervals:
            continue
        value = sum((profile.get(k, Fraction(0)) * k.measure for k in intervals), Fraction(0))
        scanned[m] = value
        if value <= budget:
            return FrequencyChoice(level=m, cover=intervals, interaction=value, scanned=scanned)
    achieved = min(scanned.values()) if scanned else None
    raise InfeasibleWithinDepth(
        "no candidate frequency keeps the interaction with earlier blocks within budget",
        {
            "stage": "select_frequency",
            "achieved": str(achieved) if achieved is not None else None,
            "budget": str(budget),
            "candidates": sorted(set(candidate_levels)),
            "depth": T.depth,
            "suggested_depth": max([T.depth, *candidate_levels]) + 1,
        },
    )


@dataclass
class SieveResult:
    levels: Tuple[int, ...]
    estimate: H1Estimate
    method: str
    per_level: Dict[int, H1Estimate] = field(default_factory=dict)


def sieve_select(
    T: OperatorMatrix,
    b: HaarVector,
    available_levels: Sequence[int],
    budget: Any,
    require_nonempty: bool = True,
    norm_bound: Optional[Fraction] = None,
    workers: Optional[int] = None,
) -> SieveResult:
    """
    Choose Λ ⊆ available_levels with ‖P_Λ(T*b)‖_{H¹} ≤ budget.

    By the bracket estimate this bounds |⟨T P_Λ f, b⟩| for every f in the
    SL∞ unit ball. Levels are admitted greedily, cheapest first; if not even
    one level fits, the levels are dealt round-robin into
    k = ⌈‖T‖²‖b‖²_{H¹}/budget²⌉ groups and the cheapest group is tried.
    """
    budget = Fraction(budget)
    available = sorted(set(available_levels))
    if not available:
        if require_nonempty:
            raise PreconditionError("sieve_select needs at least one available level")
        return SieveResult(levels=(), estimate=h1_norm(HaarVector.zero()), method="empty")

    c = project_levels(T.adjoint_column(b), available)
    estimates = parallel_map(lambda m: h1_norm(project_levels(c, [m])), available, workers=workers)
    per_level = dict(zip(available, estimates))

    chosen: List[int] = []
    estimate = h1_norm(HaarVector.zero())
    for m in sorted(available, key=lambda level: (per_level[level].upper, level)):
        trial = sorted(chosen + [m])
        trial_estimate = h1_norm(project_levels(c, trial))
        if trial_estimate.upper_fraction() <= budget:
            chosen, estimate = trial, trial_estimate
    if chosen or not require_nonempty:
        return SieveResult(levels=tuple(chosen), estimate=estimate, method="greedy", per_level=per_level)

    bound = Fraction(norm_bound) if norm_bound is not None else T.norm_bound
    groups_needed = math.ceil(bound ** 2 * h1_norm(b).upper_fraction() ** 2 / budget ** 2)
    k = max(1, min(len(available), groups_needed))
    groups = [available[g::k] for g in range(k)]
    group_estimates = [h1_norm(project_levels(c, group)) for group in groups]
    best = min(range(k), key=lambda g: group_estimates[g].upper)
    if group_estimates[best].upper_fraction() <= budget:
        return SieveResult(
            levels=tuple(groups[best]), estimate=group_estimates[best], method="pigeonhole", per_level=per_level
        )
    achieved = min(e.upper for e in per_level.values())
    raise InfeasibleWithinDepth(
        "no nonempty level set certifies the future budget",
        {
            "stage": "sieve_select",
            "achieved": achieved,
            "budget": str(budget),
            "groups": k,
            "depth": T.depth,
            "suggested_depth": T.depth + 1,
        },
    )


@dataclass
class IndexRecord:
    """The inequalities recorded for one block b_i."""

    index: DyadicInterval
    level: int
    norm_sq: Fraction
    budget: Fraction
    interaction: Fraction
    interaction_majorant: Fraction
    diagonal: Fraction
    diagonal_bound: Optional[Fraction]
    future: H1Estimate
    sieve_method: str
    expanded: Optional[Fraction] = None
    expanded_consistent: Optional[bool] = None
    level_span_ok: Optional[bool] = None
    future_lower: Optional[float] = None

    @property
    def interaction_ok(self) -> bool:
        return self.interaction <= self.interaction_majorant <= self.budget

    @property
    def diagonal_ok(self) -> bool:
        return self.diagonal_bound is None or self.diagonal >= self.diagonal_bound

    @property
    def future_ok(self) -> bool:
        return self.future.upper_fraction() <= self.budget

    @property
    def ok(self) -> bool:
        return (
            self.interaction_ok
            and self.diagonal_ok
            and self.future_ok
            and self.expanded_consistent is not False
            and self.level_span_ok is not False
        )

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "index": self.index.to_json(),
            "ordering": self.index.ordering(),
            "level": self.level,
            "norm_sq": str(self.norm_sq),
            "budget": str(self.budget),
            "interaction": str(self.interaction),
            "interaction_majorant": str(self.interaction_majorant),
            "diagonal": str(self.diagonal),
            "diagonal_bound": str(self.diagonal_bound) if self.diagonal_bound is not None else None,
            "future": self.future.to_json(),
            "sieve_method": self.sieve_method,
            "expanded": str(self.expanded) if self.expanded is not None else None,
            "expanded_consistent": self.expanded_consistent,
            "level_span_ok": self.level_span_ok,
            "ok": self.ok,
        }
        if self.future_lower is not None:
            data["future_lower"] = self.future_lower
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "IndexRecord":
        try:
            return cls(
                index=DyadicInterval.from_json(data["index"]),
                level=int(data["level"]),
                norm_sq=Fraction(data["norm_sq"]),
                budget=Fraction(data["budget"]),
                interaction=Fraction(data["interaction"]),
                interaction_majorant=Fraction(data["interaction_majorant"]),
                diagonal=Fraction(data["diagonal"]),
                diagonal_bound=Fraction(data["diagonal_bound"]) if data.get("diagonal_bound") is not None else None,
                future=H1Estimate(float(data["future"]["value"]), float(data["future"]["error"])),
                sieve_method=str(data.get("sieve_method", "greedy")),
                expanded=Fraction(data["expanded"]) if data.get("expanded") is not None else None,
                expanded_consistent=data.get("expanded_consistent"),
                level_span_ok=data.get("level_span_ok"),
                future_lower=data.get("future_lower"),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"malformed certificate record: {e}") from e


@dataclass
class DiagonalizationCertificate:
    eta: Fraction
    delta: Fraction
    depth: int
    index_depth: int
    normalized: bool
    diagonal_flips: SignAssignment
    norm_bound: Fraction
    norm_bound_source: str
    records: List[IndexRecord]
    lambda_sets: List[Tuple[int, ...]]
    feasible: bool = True
    notes: List[str] = field(default_factory=list)

    @property
    def frequencies(self) -> List[int]:
        return [r.level for r in self.records]

    def operator(self, T: OperatorMatrix) -> OperatorMatrix:
        """The operator the construction worked on: T, or T·M_σ when normalized."""
        flips = self.diagonal_flips.as_dict()
        return T.flip_columns(flips) if flips else T

    def to_json(self) -> Dict[str, Any]:
        return {
            "eta": str(self.eta),
            "delta": str(self.delta),
            "depth": self.depth,
            "index_depth": self.index_depth,
            "normalized": self.normalized,
            "diagonal_flips": self.diagonal_flips.to_json(),
            "norm_bound": str(self.norm_bound),
            "norm_bound_source": self.norm_bound_source,
            "feasible": self.feasible,
            "lambda_sets": [list(s) for s in self.lambda_sets],
            "per_index": [r.to_json() for r in self.records],
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, data: Any) -> "DiagonalizationCertificate":
        if not isinstance(data, dict) or "per_index" not in data:
            raise InputFormatError("a certificate must be an object with 'per_index' records")
        try:
            return cls(
                eta=Fraction(data["eta"]),
                delta=Fraction(data["delta"]),
                depth=int(data["depth"]),
                index_depth=int(data["index_depth"]),
                normalized=bool(data.get("normalized", True)),
                diagonal_flips=SignAssignment.from_json(data.get("diagonal_flips", [])),
                norm_bound=Fraction(data["norm_bound"]),
                norm_bound_source=str(data.get("norm_bound_source", "supplied")),
                records=[IndexRecord.from_json(r) for r in data["per_index"]],
                lambda_sets=[tuple(int(m) for m in s) for s in data.get("lambda_sets", [])],
                feasible=bool(data.get("feasible", False)),
                notes=list(data.get("notes", [])),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"malformed certificate: {e}") from e


def _record_expanded(
    records: List[IndexRecord],
    vectors: List[HaarVector],
    images: List[HaarVector],
    lambda_sets: List[Tuple[int, ...]],
):
    """Fill in Σ_{j>i} |⟨T b_j, b_i⟩| and check it against the H¹ certificate."""
    for i, record in enumerate(records):
        expanded = Fraction(0)
        span = HaarVector.zero()
        for j in range(i + 1, len(records)):
            value = inner_product(images[j], vectors[i])
            expanded += abs(value)
            span = span + (vectors[j] if value >= 0 else -vectors[j])
        record.expanded = expanded
        upper = record.future.upper_fraction()
        record.expanded_consistent = expanded * expanded <= sl_inf_norm_sq(span) * upper * upper
        later = set(lambda_sets[i + 1])
        record.level_span_ok = all(records[j].level in later for j in range(i + 1, len(records)))


def quasi_diagonalize(
    T: OperatorMatrix,
    delta: Any,
    eta: Any,
    index_depth: int,
    normalize: bool = True,
    trace: Optional[ConstructionTrace] = None,
    workers: Optional[int] = None,
    ascent_iterations: int = 0,
) -> Tuple[BlockBasis, DiagonalizationCertificate]:
    """
    Build the Gamlen-Gaudet block basis (b_I : I ∈ 𝒟^index_depth) for T.

    With ``normalize`` the construction runs on T·M_σ (positive diagonal) and the
    certificate records σ. Without it δ must be 0 and the diagonal inequality is
    recorded but not required.
    """
    delta, eta = Fraction(delta), Fraction(eta)
    if eta <= 0:
        raise PreconditionError(f"η must be positive, got {eta}")
    if delta < 0:
        raise PreconditionError(f"δ must be nonnegative, got {delta}")
    depth = T.depth
    if not 0 <= index_depth <= depth:
        raise DepthBudgetError(f"index depth {index_depth} must lie in [0, {depth}]")

    if normalize:
        work, flips = normalize_diagonal_signs(T, delta)
    else:
        if delta != 0:
            raise PreconditionError("an unnormalized construction is only defined for δ = 0")
        work, flips = T, SignAssignment()
    note(trace, "quasi_diag", f"start: N={depth}, index depth {index_depth}, δ={delta}, η={eta}", "info")

    indices = dyadic_tree(index_depth, budget=depth)
    blocks: Dict[DyadicInterval, List[DyadicInterval]] = {}
    signs: Dict[DyadicInterval, int] = {}
    vectors: List[HaarVector] = []
    images: List[HaarVector] = []
    records: List[IndexRecord] = []
    lambda_sets: List[Tuple[int, ...]] = [tuple(range(depth + 1))]
    profile: Dict[DyadicInterval, Fraction] = {}

    for i, index in enumerate(indices):
        budget = eta * index.measure / (4 ** i)
        try:
            if i == 0:
                level, cover, majorant = 0, [ROOT], Fraction(0)
            else:
                parent_blocks = blocks[index.parent()]
                side = LEFT if index.is_left_child() else RIGHT
                choice = select_frequency(
                    work,
                    vectors,
                    lambda_sets[i],
                    lambda m: gamlen_gaudet_children(parent_blocks, side, m),
                    budget,
                    profile=profile,
                )
                level, cover, majorant = choice.level, choice.cover, choice.interaction
            eps = choose_signs(work, cover)
            b = HaarVector({k: eps[k] for k in cover})
            last = i == len(indices) - 1
            available = [m for m in lambda_sets[i] if m > level]
            if not available and not last:
                raise InfeasibleWithinDepth(
                    f"no levels left below level {level} for the later blocks",
                    {"stage": "sieve_select", "level": level, "budget": str(budget)},
                )
            sieve = sieve_select(
                work,
                b,
                available,
                budget,
                require_nonempty=not last,
                workers=workers,
            )
        except InfeasibleWithinDepth as e:
            e.report.update(
                {
                    "step": i,
                    "index": index.to_json(),
                    "depth": depth,
                    "index_depth": index_depth,
                    "suggested_depth": depth + 2,
                }
            )
            if trace is not None:
                trace.add_error("quasi_diag", str(e), step=i)
            raise

        image = work.apply(b)
        norm_sq = sum((k.measure for k in cover), Fraction(0))
        interaction = sum((abs(inner_product(images[j], b)) for j in range(i)), Fraction(0))
        diagonal = inner_product(image, b)
        record = IndexRecord(
            index=index,
            level=level,
            norm_sq=norm_sq,
            budget=budget,
            interaction=interaction,
            interaction_majorant=majorant,
            diagonal=diagonal,
            diagonal_bound=delta * norm_sq if normalize else None,
            future=sieve.estimate,
            sieve_method=sieve.method,
        )
        if ascent_iterations > 0:
            c = project_levels(work.adjoint_column(b), sieve.levels)
            record.future_lower = convex_ascent(c, iterations=ascent_iterations).value

        blocks[index] = cover
        signs.update(eps.items())
        vectors.append(b)
        images.append(image)
        records.append(record)
        lambda_sets.append(sieve.levels)
        for interval, value in image.items():
            profile[interval] = profile.get(interval, Fraction(0)) + abs(value)
        note(
            trace,
            "quasi_diag",
            f"step {i}: {index} at level {level}, {len(cover)} intervals, Λ = {list(sieve.levels)}",
            level=level,
        )

    _record_expanded(records, vectors, images, lambda_sets)
    family = IntervalFamily(blocks)
    basis = build_block_basis(family, SignAssignment(signs), check=False)
    certificate = DiagonalizationCertificate(
        eta=eta,
        delta=delta,
        depth=depth,
        index_depth=index_depth,
        normalized=normalize,
        diagonal_flips=flips,
        norm_bound=T.norm_bound,
        norm_bound_source=T.norm_bound_source,
        records=records,
        lambda_sets=lambda_sets,
        feasible=all(r.ok for r in records),
        notes=[
            "future bounds quantify over vectors on the levels of Λ_{i+1} up to depth N",
            f"operator norm bound is {T.norm_bound_source}",
        ],
    )
    note(trace, "quasi_diag", f"done: frequencies {certificate.frequencies}", "success")
    return basis, certificate


@dataclass
class CertificateReplay:
    passed: bool
    failures: List[Dict[str, Any]] = field(default_factory=list)
    checks: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checks": self.checks, "failures": self.failures}


def _adjoint_by_columns(T: OperatorMatrix, b: HaarVector, levels: Sequence[int]) -> HaarVector:
    coeffs: Dict[DyadicInterval, Fraction] = {}
    for m in levels:
        for k in range(1 << m):
            interval = DyadicInterval(m, k)
            value = T.pairing(interval, b)
            if value:
                coeffs[interval] = value / interval.measure
    return HaarVector(coeffs)


def verify_certificate(
    T: OperatorMatrix, basis: BlockBasis, certificate: DiagonalizationCertificate
) -> CertificateReplay:
    """
    Re-check every recorded inequality from the operator and the stored basis.

    Pairings go through ⟨b_j, T*b_i⟩ and column pairings instead of the images
    used during construction.
    """
    failures: List[Dict[str, Any]] = []
    checks = 0

    def check(condition: bool, name: str, **detail: Any):
        nonlocal checks
        checks += 1
        if not condition:
            failures.append({"check": name, **{k: str(v) for k, v in detail.items()}})

    if certificate.normalized:
        _, flips = normalize_diagonal_signs(T, certificate.delta)
        check(flips == certificate.diagonal_flips, "diagonal_flips")
    work = certificate.operator(T)

    report = check_jones(basis.family)
    check(report.satisfied and report.kappa == 1, "jones", kappa=report.kappa)

    indices = dyadic_tree(certificate.index_depth, budget=certificate.depth)
    check(len(indices) == len(certificate.records), "record_count")
    check(len(certificate.lambda_sets) == len(certificate.records) + 1, "lambda_count")
    if failures:
        return CertificateReplay(passed=False, failures=failures, checks=checks)

    vectors = [basis.vector(index) for index in indices]
    adjoints = [work.adjoint_column(b) for b in vectors]
    previous = -1
    for i, (index, record) in enumerate(zip(indices, certificate.records)):
        b = vectors[i]
        check(record.index == index, "index_order", index=i)
        check(all(k.n == record.level for k in b), "cover_level", index=i)
        check(record.level > previous, "frequency_increasing", index=i)
        previous = record.level
        here, after = set(certificate.lambda_sets[i]), set(certificate.lambda_sets[i + 1])
        check(record.level in here and record.level not in after, "frequency_in_lambda", index=i)
        check(after <= here, "lambda_nested", index=i)

        norm_sq = inner_product(b, b)
        check(norm_sq == record.norm_sq == index.measure, "norm_sq", index=i, replayed=norm_sq)
        check(record.budget == certificate.eta * index.measure / (4 ** i), "budget", index=i)

        interaction = sum((abs(inner_product(vectors[j], adjoints[i])) for j in range(i)), Fraction(0))
        check(interaction == record.interaction, "interaction_value", index=i, replayed=interaction)
        check(interaction <= record.budget, "interaction_budget", index=i, replayed=interaction)

        diagonal = inner_product(b, adjoints[i])
        check(diagonal == record.diagonal, "diagonal_value", index=i, replayed=diagonal)
        if certificate.normalized:
            check(diagonal >= certificate.delta * norm_sq, "diagonal_bound", index=i, replayed=diagonal)

        future = h1_norm(_adjoint_by_columns(work, b, certificate.lambda_sets[i + 1]))
        check(
            future.value == record.future.value and future.error == record.future.error,
            "future_value",
            index=i,
            replayed=future.value,
        )
        check(future.upper_fraction() <= record.budget, "future_budget", index=i, replayed=future.upper)

        expanded = Fraction(0)
        span = HaarVector.zero()
        for j in range(i + 1, len(vectors)):
            value = inner_product(vectors[j], adjoints[i])
            expanded += abs(value)
            span = span + (vectors[j] if value >= 0 else -vectors[j])
        upper = future.upper_fraction()
        check(expanded == record.expanded, "expanded_value", index=i, replayed=expanded)
        check(expanded * expanded <= sl_inf_norm_sq(span) * upper * upper, "expanded_consistent", index=i)
        later = set(certificate.lambda_sets[i + 1])
        check(
            all(certificate.records[j].level in later for j in range(i + 1, len(vectors))),
            "level_span",
            index=i,
        )

    return CertificateReplay(passed=not failures, failures=failures, checks=checks)
