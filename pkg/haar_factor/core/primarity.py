"""
Factorization of the identity through T or Id − T.

The operator is quasi-diagonalized with δ = 0 and no sign normalization. Each
block is then T-large or (Id − T)-large. A Gamlen-Gaudet subtree of one color
is selected and composed with the block family, and the identity is factored
through the matching operator H with ‖R‖‖S‖ ≤ 2 + η.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from .block_ops import BlockBasis, build_block_basis
from .dyadic import ROOT, DyadicInterval, level_grid
from .errors import InfeasibleWithinDepth, InputFormatError, PreconditionError, VerificationFailure
from .factorization import (
    DEFAULT_TOL,
    FactorizationResult,
    assemble_factorization,
    record_slack,
    structural_contraction,
)
from .haar_space import HaarVector, inner_product, sl_inf_norm_sq
from .jones import IntervalFamily, check_jones, reiterate, selector_family
from .operators import OperatorMatrix
from .quasi_diag import CertificateReplay, DiagonalizationCertificate, quasi_diagonalize, verify_certificate
from .trace import ConstructionTrace, note
from ..utils.workers import parallel_map

T_LARGE = "T_large"
C_LARGE = "C_large"

CHOICE_T = "T"
CHOICE_ID_MINUS_T = "Id_minus_T"


@dataclass
class ColoredBlocks:
    basis: BlockBasis
    colors: Dict[DyadicInterval, str]
    diagonals: Dict[DyadicInterval, Fraction]
    chosen: Optional[str] = None

    def color_class(self, color: str) -> List[DyadicInterval]:
        return [i for i in self.basis.indices if self.colors[i] == color]

    def class_measure(self, color: str) -> Fraction:
        return sum((i.measure for i in self.color_class(color)), Fraction(0))

    def to_json(self) -> Dict[str, Any]:
        return {
            "colors": {str(i.ordering()): self.colors[i] for i in self.basis.indices},
            "diagonals": {str(i.ordering()): str(self.diagonals[i]) for i in self.basis.indices},
            "chosen": self.chosen,
        }


def color_blocks(T: OperatorMatrix, basis: BlockBasis) -> ColoredBlocks:
    """T_large when ⟨T b, b⟩ ≥ ‖b‖₂²/2, C_large otherwise."""
    colors: Dict[DyadicInterval, str] = {}
    diagonals: Dict[DyadicInterval, Fraction] = {}
    for index in basis.indices:
        b = basis.vector(index)
        value = inner_product(T.apply(b), b)
        diagonals[index] = value
        colors[index] = T_LARGE if 2 * value >= basis.norm_sq(index) else C_LARGE
    return ColoredBlocks(basis=basis, colors=colors, diagonals=diagonals)


@dataclass
class GGSelection:
    color: str
    selector: Dict[DyadicInterval, Tuple[DyadicInterval, ...]]
    levels: Dict[DyadicInterval, int]
    root: DyadicInterval = ROOT
    achieved: Dict[str, int] = field(default_factory=dict)
    kappa: Optional[Fraction] = None
    shares: Dict[str, Dict[int, Fraction]] = field(default_factory=dict)

    def family(self) -> IntervalFamily:
        """The selection as a family over block indices."""
        return IntervalFamily(self.selector)

    def to_json(self) -> Dict[str, Any]:
        return {
            "color": self.color,
            "root": self.root.to_json(),
            "selector": {
                str(j.ordering()): [i.to_json() for i in chosen] for j, chosen in sorted(self.selector.items())
            },
            "levels": {str(j.ordering()): m for j, m in sorted(self.levels.items())},
            "achieved_depth": self.achieved,
            "kappa": str(self.kappa) if self.kappa is not None else None,
            "level_shares": _shares_json(self.shares),
        }


Subtree = Tuple[int, Dict[DyadicInterval, Tuple[DyadicInterval, ...]], Dict[DyadicInterval, int]]


def level_shares(colored: ColoredBlocks) -> Dict[str, Dict[int, Fraction]]:
    """Fraction of the block-index measure at each level carried by each color."""
    totals: Dict[int, Fraction] = {}
    carried: Dict[str, Dict[int, Fraction]] = {T_LARGE: {}, C_LARGE: {}}
    for index in colored.basis.indices:
        totals[index.n] = totals.get(index.n, Fraction(0)) + index.measure
        by_level = carried[colored.colors[index]]
        by_level[index.n] = by_level.get(index.n, Fraction(0)) + index.measure
    return {
        color: {n: by_level.get(n, Fraction(0)) / total for n, total in sorted(totals.items())}
        for color, by_level in carried.items()
    }


def _shares_json(shares: Dict[str, Dict[int, Fraction]]) -> Dict[str, Dict[str, str]]:
    return {color: {str(n): str(v) for n, v in by_level.items()} for color, by_level in shares.items()}


def _cover_at(
    colors: Dict[DyadicInterval, str], color: str, parts: List[DyadicInterval], m: int, whole: bool
) -> Optional[Tuple[DyadicInterval, ...]]:
    chosen: List[DyadicInterval] = []
    for part in parts:
        inside = [k for k in part.descendants_at(m) if colors.get(k) == color]
        if not inside:
            return None
        if whole and 2 ** (m - part.n) != len(inside):
            return None
        chosen.extend(inside)
    measure = sum((k.measure for k in chosen), Fraction(0))
    if 2 * measure < sum((part.measure for part in parts), Fraction(0)):
        return None
    return tuple(chosen)


def _grow_subtree(
    colors: Dict[DyadicInterval, str],
    color: str,
    index_depth: int,
    block_depth: int,
    root: DyadicInterval = ROOT,
    partial: bool = False,
) -> Subtree:
    """
    Covers inside one color class, generation by generation.

    The target of the top index is ``root``; the target of a child is the
    matching half of every member chosen for its parent. A target is served
    by the first level below the parent's level that covers it entirely in
    ``color``. With ``partial``, failing that, the first level whose ``color``
    intervals carry at least half the target measure and meet every half is
    used. Returns the deepest complete generation reached.
    """
    selector: Dict[DyadicInterval, Tuple[DyadicInterval, ...]] = {}
    levels: Dict[DyadicInterval, int] = {}
    achieved = -1
    for generation in range(index_depth + 1):
        for index in level_grid(generation, budget=block_depth):
            parent = index.parent()
            if parent is None:
                parts, floor = [root], root.n
            else:
                side = 0 if index.is_left_child() else 1
                parts = [member.halves()[side] for member in selector[parent]]
                floor = levels[parent] + 1
            found = None
            for whole in ((True, False) if partial else (True,)):
                for m in range(floor, block_depth + 1):
                    cover = _cover_at(colors, color, parts, m, whole)
                    if cover is not None:
                        found = (m, cover)
                        break
                if found is not None:
                    break
            if found is None:
                return achieved, selector, levels
            levels[index], selector[index] = found
        achieved = generation
    return achieved, selector, levels


def _select_in_color(
    colors: Dict[DyadicInterval, str], color: str, index_depth: int, block_depth: int
) -> Tuple[int, DyadicInterval, Dict[DyadicInterval, Tuple[DyadicInterval, ...]], Dict[DyadicInterval, int]]:
    # [0, 1) first, then single class intervals in breadth-first order
    roots = [ROOT] + sorted(
        (k for k, c in colors.items() if c == color and k != ROOT and k.n + index_depth <= block_depth),
        key=DyadicInterval.ordering,
    )
    best = (-1, ROOT, {}, {})
    # whole covers at every root before any half-measure cover
    for partial in (False, True):
        for root in roots:
            achieved, selector, levels = _grow_subtree(colors, color, index_depth, block_depth, root, partial)
            if achieved > best[0]:
                best = (achieved, root, selector, levels)
            if achieved >= index_depth:
                return best
    return best


def _color_order(colored: ColoredBlocks, shares: Dict[str, Dict[int, Fraction]]) -> List[str]:
    def rank(color: str):
        majority = all(2 * share >= 1 for share in shares[color].values())
        return (not majority, -colored.class_measure(color), color != T_LARGE)

    return sorted([T_LARGE, C_LARGE], key=rank)


def gg_select(
    colored: ColoredBlocks, index_depth: int, workers: Optional[int] = None
) -> GGSelection:
    """
    Pick one color and a family (𝓒_I : I ∈ 𝒟^index_depth) of block indices in it.

    The color carrying at least half of the block measure at every level is
    tried first, then the heavier color overall, T_large on ties; the other
    color is the fallback. Within a color the subtree may start below [0, 1)
    at any single class interval. κ of the selection, read through the block
    sets, is recorded; it is 1 whenever every target is covered entirely, and
    a feasible κ = 1 selection is returned ahead of the color order.
    """
    block_depth = max((i.n for i in colored.basis.indices), default=0)
    colors = colored.colors
    shares = level_shares(colored)
    order = _color_order(colored, shares)
    results = parallel_map(
        lambda color: _select_in_color(colors, color, index_depth, block_depth), order, workers=workers
    )
    achieved = {color: result[0] for color, result in zip(order, results)}
    candidates: List[GGSelection] = []
    for color, (depth, root, selector, levels) in zip(order, results):
        if depth < index_depth:
            continue
        report = check_jones(selector_family(colored.basis.family, selector), workers=workers)
        if not report.satisfied:
            raise VerificationFailure(
                "the selected subtree violates Jones' conditions", [v.to_json() for v in report.violations]
            )
        candidates.append(
            GGSelection(
                color=color,
                selector=selector,
                levels=levels,
                root=root,
                achieved=achieved,
                kappa=report.kappa,
                shares=shares,
            )
        )
    if candidates:
        # a κ = 1 selection in the fallback color beats κ > 1 in the first
        selection = next((s for s in candidates if s.kappa == 1), candidates[0])
        colored.chosen = selection.color
        return selection
    raise InfeasibleWithinDepth(
        "no color class supports a full subtree",
        {
            "stage": "gg_select",
            "index_depth": index_depth,
            "block_depth": block_depth,
            "achievable_depth": achieved,
            "level_shares": _shares_json(shares),
            "suggested_block_depth": block_depth + 1,
        },
    )


@dataclass
class PrimaryReport:
    choice: str
    eta: Fraction
    eta0: Fraction
    delta_effective: Fraction
    colored: ColoredBlocks
    selection: GGSelection
    certificate: DiagonalizationCertificate
    composed: BlockBasis
    result: FactorizationResult
    block_depth: int

    def to_json(self, emit_matrices: bool = False) -> Dict[str, Any]:
        factor = self.result.to_json(emit_matrices=emit_matrices)
        factor.pop("kind", None)
        return {
            "kind": "primary",
            "feasible": True,
            "choice": self.choice,
            "eta": str(self.eta),
            "eta0": str(self.eta0),
            "block_depth": self.block_depth,
            "delta_effective": str(self.delta_effective),
            "delta_used": str(self.result.delta),
            "block_basis": self.colored.basis.to_json(),
            "coloring": self.colored.to_json(),
            "selection": self.selection.to_json(),
            "certificate": self.certificate.to_json(),
            "factorization": factor,
        }


def primary_eta0(eta: Fraction) -> Fraction:
    return eta / (10 * (2 + eta))


def _composed_slack(
    certificate: DiagonalizationCertificate, selector: Dict[DyadicInterval, Tuple[DyadicInterval, ...]]
) -> Dict[DyadicInterval, Fraction]:
    slack = record_slack(certificate)
    return {j: sum((slack[i] for i in chosen), Fraction(0)) for j, chosen in selector.items()}


def _work_operator(T: OperatorMatrix, choice: str) -> OperatorMatrix:
    return T if choice == CHOICE_T else T.identity_minus()


def factor_primary(
    T: OperatorMatrix,
    eta: Any,
    index_depth: int,
    block_depth: Optional[int] = None,
    tol: Any = DEFAULT_TOL,
    exhaustive_limit: int = 12,
    random_witnesses: int = 32,
    precision_bits: Optional[int] = 96,
    seed: int = 0,
    workers: Optional[int] = None,
    trace: Optional[ConstructionTrace] = None,
) -> Tuple[str, PrimaryReport]:
    """
    Factor the identity on span(h_I : I ∈ 𝒟^index_depth) through T or Id − T.

    ``block_depth`` is the index depth of the underlying δ = 0 diagonalization;
    it defaults to twice ``index_depth``.
    """
    eta = Fraction(eta)
    if eta <= 0:
        raise PreconditionError(f"η must be positive, got {eta}")
    if block_depth is None:
        block_depth = 2 * index_depth
    if block_depth < index_depth:
        raise PreconditionError(f"block depth {block_depth} is below the index depth {index_depth}")
    eta0 = primary_eta0(eta)

    basis, certificate = quasi_diagonalize(
        T, 0, eta0, block_depth, normalize=False, trace=trace, workers=workers
    )
    if not certificate.feasible:
        raise VerificationFailure(
            "the diagonalization certificate does not hold",
            [r.to_json() for r in certificate.records if not r.ok],
        )
    colored = color_blocks(T, basis)
    note(
        trace,
        "primary",
        f"{len(colored.color_class(T_LARGE))} T-large and {len(colored.color_class(C_LARGE))} (Id-T)-large blocks",
        "info",
    )
    selection = gg_select(colored, index_depth, workers=workers)
    choice = CHOICE_T if selection.color == T_LARGE else CHOICE_ID_MINUS_T
    note(trace, "primary", f"factoring through {choice}", "info")

    composed_family = reiterate(basis.family, selection.selector)
    report = check_jones(composed_family, workers=workers)
    if not report.satisfied:
        raise VerificationFailure("the composed family violates Jones' conditions", [report.to_json()])
    if report.kappa != 1:
        raise InfeasibleWithinDepth(
            "the selected subtree is not 1-equivalent to the Haar system",
            {
                "stage": "primary",
                "kappa": str(report.kappa),
                "block_depth": block_depth,
                "suggested_block_depth": block_depth + 1,
            },
        )
    composed = build_block_basis(composed_family, basis.signs, check=False)

    H = _work_operator(T, choice)
    diagonal = {i: inner_product(H.apply(composed.vector(i)), composed.vector(i)) for i in composed.indices}
    delta_effective = min(diagonal[i] / composed.norm_sq(i) for i in composed.indices)
    delta_used = min(Fraction(1, 2), delta_effective)
    if delta_used * (2 + eta) <= 1:
        raise InfeasibleWithinDepth(
            "the composed blocks lost their large diagonal",
            {"stage": "primary", "achieved": str(delta_effective), "budget": str(1 / (2 + eta)), "depth": T.depth},
        )
    target = 1 - 1 / ((2 + eta) * delta_used)

    result = assemble_factorization(
        H,
        composed,
        _composed_slack(certificate, selection.selector),
        delta_used,
        target,
        tol=tol,
        exhaustive_limit=exhaustive_limit,
        random_witnesses=random_witnesses,
        precision_bits=precision_bits,
        seed=seed,
        workers=workers,
        trace=trace,
    )
    result.eta = eta
    return choice, PrimaryReport(
        choice=choice,
        eta=eta,
        eta0=eta0,
        delta_effective=delta_effective,
        colored=colored,
        selection=selection,
        certificate=certificate,
        composed=composed,
        result=result,
        block_depth=block_depth,
    )


def replay_primary(T: OperatorMatrix, data: Dict[str, Any]) -> CertificateReplay:
    """Re-check a stored primary report against the operator alone."""
    try:
        choice = data["choice"]
        eta = Fraction(data["eta"])
        certificate = DiagonalizationCertificate.from_json(data["certificate"])
        basis = BlockBasis.from_json(data["block_basis"], check=False)
        stored_colors = dict(data["coloring"]["colors"])
        selector = {
            DyadicInterval.from_json(key): tuple(DyadicInterval.from_json(i) for i in chosen)
            for key, chosen in data["selection"]["selector"].items()
        }
        factor = data["factorization"]
        composed = BlockBasis.from_json(factor["basis"], check=False)
        delta_used = Fraction(factor["delta"])
        contraction = Fraction(factor["contraction"])
        bound = Fraction(factor["norm_product_bound"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as e:
        raise InputFormatError(f"malformed primary report: {e}") from e
    if choice not in (CHOICE_T, CHOICE_ID_MINUS_T):
        raise InputFormatError(f"unknown choice {choice!r}")

    replay = verify_certificate(T, basis, certificate)
    failures = list(replay.failures)
    checks = replay.checks

    def check(condition: bool, name: str, **detail: Any):
        nonlocal checks
        checks += 1
        if not condition:
            failures.append({"check": name, **{k: str(v) for k, v in detail.items()}})

    colored = color_blocks(T, basis)
    check(
        {str(i.ordering()): c for i, c in colored.colors.items()} == stored_colors,
        "coloring",
    )
    wanted = T_LARGE if choice == CHOICE_T else C_LARGE
    check(all(colored.colors.get(i) == wanted for chosen in selector.values() for i in chosen), "one_color")

    rebuilt = reiterate(basis.family, selector, check=False)
    check(rebuilt == composed.family, "composed_family")
    report = check_jones(rebuilt)
    check(report.satisfied and report.kappa == 1, "composed_jones", kappa=report.kappa)

    H = _work_operator(T, choice)
    diagonal = {i: inner_product(H.apply(composed.vector(i)), composed.vector(i)) for i in composed.indices}
    check(all(diagonal[i] >= delta_used * composed.norm_sq(i) for i in composed.indices), "delta_used")
    check(delta_used <= Fraction(1, 2), "delta_cap")
    replayed = structural_contraction(_composed_slack(certificate, selector), diagonal)
    check(replayed == contraction, "contraction_value", replayed=replayed)
    check(contraction <= 1 - 1 / ((2 + eta) * delta_used), "contraction_target")
    check(bound == 1 / ((1 - contraction) * delta_used), "norm_chain")
    check(bound <= 2 + eta, "norm_bound", bound=bound)
    if "R" in factor and "S" in factor:
        R, S = OperatorMatrix.from_json(factor["R"]), OperatorMatrix.from_json(factor["S"])
        defect = S.compose(H.compose(R)) - OperatorMatrix.identity(max(i.n for i in composed.indices))
        worst = max(
            (sl_inf_norm_sq(defect.apply(HaarVector.basis(i))) for i in composed.indices),
            default=Fraction(0),
        )
        check(worst <= Fraction(factor["residual"]), "residual", replayed=worst)
    return CertificateReplay(passed=not failures, failures=failures, checks=checks)

