"""
Factorization of the identity through an operator with large diagonal.

Given the block basis (b_i) of a quasi-diagonalization, U f = Σ ⟨f, b_i⟩/⟨T b_i, b_i⟩ b_i
is an almost inverse: in block coordinates UTJ is a matrix M with unit diagonal
and ‖M − Id‖ ≤ c < 1. A Neumann series inverts M, and

    R = M_σ B,    S = M⁻¹ ∘ (f ↦ (⟨f, b_i⟩ / ⟨T b_i, b_i⟩)_i)

satisfy S T R = Id on the span of (h_I : I ∈ 𝒟^index_depth).
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .block_ops import BlockBasis
from .dyadic import DyadicInterval
from .errors import InfeasibleWithinDepth, InputFormatError, PreconditionError, VerificationFailure
from .generators import counter_rng
from .haar_space import HaarVector, inner_product, sl_inf_norm_sq
from .operators import OperatorMatrix
from .quasi_diag import CertificateReplay, DiagonalizationCertificate, quasi_diagonalize, verify_certificate
from .trace import ConstructionTrace, note
from ..utils.workers import parallel_map

DEFAULT_TOL = Fraction(1, 1 << 40)


def choose_eta_prime(delta: Any, eta: Any) -> Fraction:
    """
    Largest η' = δη/(4(1+η)) · 2^-j with 4η'/δ < 1 and 1/(1 − 4η'/δ) ≤ 1 + η.
    """
    delta, eta = Fraction(delta), Fraction(eta)
    if delta <= 0 or eta <= 0:
        raise PreconditionError(f"δ and η must be positive, got δ={delta}, η={eta}")
    candidate = delta * eta / (4 * (1 + eta))
    while True:
        ratio = 4 * candidate / delta
        if ratio < 1 and 1 / (1 - ratio) <= 1 + eta:
            return candidate
        candidate /= 2


class AlmostInverse:
    """U f = Σ_i ⟨f, b_i⟩ / d_i · b_i with d_i = ⟨T b_i, b_i⟩."""

    def __init__(self, basis: BlockBasis, diagonal: Dict[DyadicInterval, Fraction]):
        for index, value in diagonal.items():
            if value <= 0:
                raise PreconditionError(f"⟨T b, b⟩ = {value} is not positive for block {index}")
        self.basis = basis
        self.diagonal = diagonal
        self.weights = {i: basis.norm_sq(i) / diagonal[i] for i in basis.indices}

    @property
    def norm_bound(self) -> Fraction:
        """max ‖b_i‖₂²/d_i, which is at most 1/δ."""
        return max(self.weights.values(), default=Fraction(0))

    def coefficients(self, f: HaarVector) -> HaarVector:
        """The block coefficients (⟨f, b_i⟩ / d_i)_i as a vector on the index tree."""
        return HaarVector(
            {i: inner_product(f, self.basis.vector(i)) / self.diagonal[i] for i in self.basis.indices}
        )

    def apply(self, f: HaarVector) -> HaarVector:
        result = HaarVector.zero()
        for index, value in self.coefficients(f).items():
            result = result + self.basis.vector(index).scale(value)
        return result


def build_U(T: OperatorMatrix, basis: BlockBasis, certificate: Optional[DiagonalizationCertificate] = None) -> AlmostInverse:
    if certificate is not None:
        if not certificate.feasible or certificate.delta <= 0:
            raise PreconditionError("U needs a feasible certificate with δ > 0")
        T = certificate.operator(T)
    diagonal = {i: inner_product(T.apply(basis.vector(i)), basis.vector(i)) for i in basis.indices}
    return AlmostInverse(basis, diagonal)


def block_matrix(T: OperatorMatrix, basis: BlockBasis, diagonal: Mapping[DyadicInterval, Fraction]) -> OperatorMatrix:
    """UTJ in block coordinates: M_{ij} = ⟨T b_j, b_i⟩ / d_i."""
    depth = max(i.n for i in basis.indices)
    entries: Dict[Tuple[DyadicInterval, DyadicInterval], Fraction] = {}
    for col in basis.indices:
        image = T.apply(basis.vector(col))
        for row in basis.indices:
            value = inner_product(image, basis.vector(row))
            if value:
                entries[(row, col)] = value / diagonal[row]
    return OperatorMatrix(depth, entries, norm_bound=None)


def _round_matrix(A: OperatorMatrix, bits: int) -> Tuple[OperatorMatrix, Fraction]:
    """Round every entry to the grid 2^-bits; return the rounded matrix and the mass of the change."""
    scale = 1 << bits
    columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
    change = Fraction(0)
    for row, col, value in A.entries():
        rounded = Fraction(round(value * scale), scale)
        change += abs(value - rounded)
        if rounded:
            columns.setdefault(col, {})[row] = rounded
    return OperatorMatrix._from_columns(A.depth, columns, norm_bound=A.norm_bound), change


@dataclass
class NeumannInverse:
    matrix: OperatorMatrix
    terms: int
    tail_bound: Fraction
    rounding_bound: Fraction
    precision_bits: Optional[int]

    @property
    def error_bound(self) -> Fraction:
        return self.tail_bound + self.rounding_bound

    def to_json(self) -> Dict[str, Any]:
        return {
            "terms": self.terms,
            "tail_bound": str(self.tail_bound),
            "rounding_bound": str(self.rounding_bound),
            "error_bound": str(self.error_bound),
            "precision_bits": self.precision_bits,
        }


def neumann_invert(
    M: OperatorMatrix,
    contraction: Any,
    tol: Any = DEFAULT_TOL,
    precision_bits: Optional[int] = None,
) -> NeumannInverse:
    """
    Σ_{k=0}^{K} (Id − M)^k with K the least integer such that c^{K+1}/(1 − c) ≤ tol.

    A power that vanishes exactly ends the series with no tail. With
    ``precision_bits`` each power is rounded to 2^-bits; the rounding error is
    propagated through the contraction and reported separately.
    """
    c, tol = Fraction(contraction), Fraction(tol)
    if not 0 <= c < 1:
        raise PreconditionError(f"Neumann series needs a contraction in [0, 1), got {c}")
    if tol <= 0:
        raise PreconditionError(f"tolerance must be positive, got {tol}")
    terms = 0
    if c > 0:
        while c ** (terms + 1) / (1 - c) > tol:
            terms += 1
    identity = OperatorMatrix.identity(M.depth)
    defect = identity - M
    total, power = identity, identity
    rounding = Fraction(0)
    tail = c ** (terms + 1) / (1 - c)
    for k in range(1, terms + 1):
        power = defect.compose(power)
        if power.nnz == 0:
            terms, tail = k - 1, Fraction(0)
            break
        if precision_bits is not None:
            power, change = _round_matrix(power, precision_bits)
            rounding += change / (1 - c)
        total = total + power
    bound = sum((c ** k for k in range(terms + 1)), Fraction(0)) + rounding
    return NeumannInverse(
        matrix=total.with_norm_bound(bound, "structural"),
        terms=terms,
        tail_bound=tail,
        rounding_bound=rounding,
        precision_bits=precision_bits,
    )


@dataclass
class WitnessSummary:
    exhaustive: int
    random: int
    max_ratio: Fraction
    bound: Fraction
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> Dict[str, Any]:
        return {
            "exhaustive": self.exhaustive,
            "random": self.random,
            "max_ratio": str(self.max_ratio),
            "bound": str(self.bound),
            "failures": self.failures,
        }


def _random_block_vector(rng, indices: Sequence[DyadicInterval]) -> HaarVector:
    values = rng.integers(-256, 257, size=len(indices))
    return HaarVector({i: Fraction(int(v), 256) for i, v in zip(indices, values)})


def check_contraction(
    M: OperatorMatrix,
    contraction: Fraction,
    indices: Sequence[DyadicInterval],
    exhaustive_limit: int = 12,
    random_witnesses: int = 32,
    seed: int = 0,
    workers: Optional[int] = None,
) -> WitnessSummary:
    """
    Test sl((M − Id) a) ≤ c² · sl(a) on all ±1 patterns (up to ``exhaustive_limit``
    indices) and on seeded random coefficient vectors.
    """
    witnesses: List[HaarVector] = []
    exhaustive = 0
    if len(indices) <= exhaustive_limit:
        for pattern in itertools.product((1, -1), repeat=len(indices)):
            witnesses.append(HaarVector(dict(zip(indices, pattern))))
        exhaustive = len(witnesses)
    rng = counter_rng(seed)
    for _ in range(random_witnesses):
        vector = _random_block_vector(rng, indices)
        if not vector.is_zero():
            witnesses.append(vector)
    defect = M - OperatorMatrix.identity(M.depth)
    bound = contraction * contraction

    def ratio(a: HaarVector) -> Fraction:
        return sl_inf_norm_sq(defect.apply(a)) / sl_inf_norm_sq(a)

    ratios = parallel_map(ratio, witnesses, workers=workers)
    failures = [
        {"witness": a.to_json(), "ratio": str(r), "bound": str(bound)}
        for a, r in zip(witnesses, ratios)
        if r > bound
    ]
    return WitnessSummary(
        exhaustive=exhaustive,
        random=len(witnesses) - exhaustive,
        max_ratio=max(ratios, default=Fraction(0)),
        bound=bound,
        failures=failures,
    )


@dataclass
class FactorizationResult:
    R: OperatorMatrix
    S: OperatorMatrix
    delta: Fraction
    contraction: Fraction
    contraction_target: Fraction
    norm_product_bound: Fraction
    residual: Fraction
    tol: Fraction
    neumann: NeumannInverse
    witnesses: WitnessSummary
    diagonal: Dict[DyadicInterval, Fraction]
    basis: BlockBasis
    eta: Optional[Fraction] = None
    eta_prime: Optional[Fraction] = None
    certificate: Optional[DiagonalizationCertificate] = None

    def to_json(self, emit_matrices: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": "factor",
            "feasible": True,
            "delta": str(self.delta),
            "eta": str(self.eta) if self.eta is not None else None,
            "eta_prime": str(self.eta_prime) if self.eta_prime is not None else None,
            "contraction": str(self.contraction),
            "contraction_target": str(self.contraction_target),
            "norm_product_bound": str(self.norm_product_bound),
            "residual": str(self.residual),
            "tol": str(self.tol),
            "neumann": self.neumann.to_json(),
            "witnesses": self.witnesses.to_json(),
            "diagonal": {str(i.ordering()): str(v) for i, v in sorted(self.diagonal.items())},
            "basis": self.basis.to_json(),
        }
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_json()
        if emit_matrices:
            data["R"] = self.R.to_json()
            data["S"] = self.S.to_json()
        return data


def structural_contraction(
    slack: Mapping[DyadicInterval, Fraction], diagonal: Mapping[DyadicInterval, Fraction]
) -> Fraction:
    """Σ_i slack_i / d_i, where slack_i bounds the off-diagonal row i of UTJ against ‖g‖."""
    return sum((slack[i] / diagonal[i] for i in diagonal), Fraction(0))


def _residual(
    product: OperatorMatrix, indices: Sequence[DyadicInterval], seed: int, samples: int = 8
) -> Fraction:
    identity = OperatorMatrix.identity(max(i.n for i in indices))
    defect = product - identity
    tests = [HaarVector.basis(i) for i in indices]
    rng = counter_rng(seed + 1)
    for _ in range(samples):
        vector = _random_block_vector(rng, indices)
        if not vector.is_zero():
            tests.append(vector)
    return max((sl_inf_norm_sq(defect.apply(f)) / sl_inf_norm_sq(f) for f in tests), default=Fraction(0))


def assemble_factorization(
    operator: OperatorMatrix,
    basis: BlockBasis,
    slack: Mapping[DyadicInterval, Fraction],
    delta: Any,
    target: Any,
    column_signs: Optional[Mapping[DyadicInterval, int]] = None,
    tol: Any = DEFAULT_TOL,
    exhaustive_limit: int = 12,
    random_witnesses: int = 32,
    precision_bits: Optional[int] = 96,
    seed: int = 0,
    workers: Optional[int] = None,
    trace: Optional[ConstructionTrace] = None,
) -> FactorizationResult:
    """
    Build R and S with S·H·R = Id on the index span, where H is ``operator``.

    The basis must be almost diagonal for H·M_σ (σ = ``column_signs``) with
    ⟨H M_σ b_i, b_i⟩ ≥ δ‖b_i‖₂²; ``slack`` bounds each off-diagonal row of the
    block matrix and must give a structural contraction at most ``target``.
    """
    delta, target, tol = Fraction(delta), Fraction(target), Fraction(tol)
    signs = dict(column_signs or {})
    work = operator.flip_columns(signs) if signs else operator
    indices = basis.indices

    diagonal = {i: inner_product(work.apply(basis.vector(i)), basis.vector(i)) for i in indices}
    for index in indices:
        if diagonal[index] < delta * basis.norm_sq(index) or diagonal[index] <= 0:
            raise PreconditionError(f"block {index} has diagonal {diagonal[index]} below δ‖b‖² for δ = {delta}")
    contraction = structural_contraction(slack, diagonal)
    if not contraction <= target < 1:
        raise InfeasibleWithinDepth(
            "structural contraction exceeds its target",
            {
                "stage": "contraction",
                "achieved": str(contraction),
                "budget": str(target),
                "depth": operator.depth,
                "suggested_depth": operator.depth + 1,
            },
        )
    note(trace, "factor", f"structural contraction {float(contraction):.3e} (target {float(target):.3e})", "info")

    M = block_matrix(work, basis, diagonal)
    witnesses = check_contraction(
        M, contraction, indices, exhaustive_limit=exhaustive_limit, random_witnesses=random_witnesses,
        seed=seed, workers=workers,
    )
    if not witnesses.passed:
        raise VerificationFailure("a contraction witness violates the certified bound", witnesses.failures)
    note(trace, "factor", f"{witnesses.exhaustive + witnesses.random} contraction witnesses passed")

    inverse = neumann_invert(M, contraction, tol, precision_bits=precision_bits)
    note(trace, "factor", f"Neumann series with {inverse.terms} terms")

    r_columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
    for index in indices:
        r_columns[index] = {k: v * signs.get(k, 1) for k, v in basis.vector(index).items()}
    R = OperatorMatrix._from_columns(operator.depth, r_columns, norm_bound=Fraction(1), norm_bound_source="structural")

    s_columns: Dict[DyadicInterval, Dict[DyadicInterval, Fraction]] = {}
    for j in indices:
        inverse_column = inverse.matrix.column(j)
        for k, sign in basis.vector(j).items():
            weight = sign * k.measure / diagonal[j]
            s_columns[k] = {i: value * weight for i, value in inverse_column.items()}
    norm_product_bound = 1 / ((1 - contraction) * delta)
    S = OperatorMatrix._from_columns(
        operator.depth, s_columns, norm_bound=norm_product_bound, norm_bound_source="structural"
    )

    product = S.compose(operator.compose(R))
    residual = _residual(product, indices, seed)
    allowed = max(tol, inverse.error_bound)
    if residual > allowed * allowed:
        raise VerificationFailure(
            "S·H·R differs from the identity by more than the tolerance",
            [{"residual": str(residual), "allowed": str(allowed * allowed)}],
        )
    note(trace, "factor", f"residual {float(residual):.3e}", "success")

    return FactorizationResult(
        R=R,
        S=S,
        delta=delta,
        contraction=contraction,
        contraction_target=target,
        norm_product_bound=norm_product_bound,
        residual=residual,
        tol=tol,
        neumann=inverse,
        witnesses=witnesses,
        diagonal=diagonal,
        basis=basis,
    )


def record_slack(certificate: DiagonalizationCertificate) -> Dict[DyadicInterval, Fraction]:
    """interaction_i + (future_i value + error): the row-i bound of UTJ − Id times d_i."""
    return {r.index: r.interaction + r.future.upper_fraction() for r in certificate.records}


def factor_identity(
    T: OperatorMatrix,
    delta: Any,
    eta: Any,
    index_depth: int,
    tol: Any = DEFAULT_TOL,
    exhaustive_limit: int = 12,
    random_witnesses: int = 32,
    precision_bits: Optional[int] = 96,
    seed: int = 0,
    workers: Optional[int] = None,
    trace: Optional[ConstructionTrace] = None,
) -> FactorizationResult:
    """Factor the identity on span(h_I : I ∈ 𝒟^index_depth) through T with ‖R‖‖S‖ ≤ (1+η)/δ."""
    delta, eta = Fraction(delta), Fraction(eta)
    eta_prime = choose_eta_prime(delta, eta)
    note(trace, "factor", f"η' = {eta_prime}", "info")
    basis, certificate = quasi_diagonalize(
        T, delta, eta_prime, index_depth, normalize=True, trace=trace, workers=workers
    )
    if not certificate.feasible:
        raise VerificationFailure(
            "the diagonalization certificate does not hold",
            [r.to_json() for r in certificate.records if not r.ok],
        )
    result = assemble_factorization(
        T,
        basis,
        record_slack(certificate),
        delta,
        4 * eta_prime / delta,
        column_signs=certificate.diagonal_flips.as_dict(),
        tol=tol,
        exhaustive_limit=exhaustive_limit,
        random_witnesses=random_witnesses,
        precision_bits=precision_bits,
        seed=seed,
        workers=workers,
        trace=trace,
    )
    result.eta = eta
    result.eta_prime = eta_prime
    result.certificate = certificate
    return result


def replay_factorization(T: OperatorMatrix, data: Dict[str, Any]) -> CertificateReplay:
    """Re-check a stored factor report against the operator alone."""
    try:
        certificate = DiagonalizationCertificate.from_json(data["certificate"])
        basis = BlockBasis.from_json(data["basis"], check=False)
        delta = Fraction(data["delta"])
        contraction = Fraction(data["contraction"])
        target = Fraction(data["contraction_target"])
        bound = Fraction(data["norm_product_bound"])
        eta = Fraction(data["eta"]) if data.get("eta") is not None else None
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InputFormatError(f"malformed factor report: {e}") from e

    replay = verify_certificate(T, basis, certificate)
    failures = list(replay.failures)
    checks = replay.checks

    def check(condition: bool, name: str, **detail: Any):
        nonlocal checks
        checks += 1
        if not condition:
            failures.append({"check": name, **{k: str(v) for k, v in detail.items()}})

    work = certificate.operator(T)
    diagonal = {i: inner_product(work.apply(basis.vector(i)), basis.vector(i)) for i in basis.indices}
    replayed = structural_contraction(record_slack(certificate), diagonal)
    check(replayed == contraction, "contraction_value", replayed=replayed)
    check(contraction <= target < 1, "contraction_target")
    check(bound == 1 / ((1 - contraction) * delta), "norm_chain", replayed=1 / ((1 - contraction) * delta))
    if eta is not None:
        check(bound <= (1 + eta) / delta, "norm_bound", bound=bound)
    if "R" in data and "S" in data:
        R, S = OperatorMatrix.from_json(data["R"]), OperatorMatrix.from_json(data["S"])
        residual = _residual(S.compose(T.compose(R)), basis.indices, 0, samples=0)
        check(residual <= Fraction(data["residual"]), "residual", replayed=residual)
    return CertificateReplay(passed=not failures, failures=failures, checks=checks)
