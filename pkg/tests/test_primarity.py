"""Tests for coloring, Gamlen-Gaudet subtree selection and factorization through T or Id − T."""

from fractions import Fraction

import pytest

from haar_factor.core.block_ops import SignAssignment, build_block_basis
from haar_factor.core.dyadic import ROOT, DyadicInterval, dyadic_tree
from haar_factor.core.errors import InfeasibleWithinDepth, PreconditionError
from haar_factor.core.generators import GeneratorSpec, generate
from haar_factor.core.jones import IntervalFamily, check_jones, reiterate, selector_family
from haar_factor.core.operators import OperatorMatrix
from haar_factor.core.primarity import (
    C_LARGE,
    CHOICE_ID_MINUS_T,
    CHOICE_T,
    T_LARGE,
    ColoredBlocks,
    color_blocks,
    factor_primary,
    gg_select,
    level_shares,
    primary_eta0,
    replay_primary,
)

L, R = DyadicInterval(1, 0), DyadicInterval(1, 1)


def identity_basis(depth):
    return build_block_basis(IntervalFamily.identity(depth), SignAssignment.all_plus(dyadic_tree(depth)))


def test_primary_eta0():
    assert primary_eta0(Fraction(1)) == Fraction(1, 30)


def test_color_blocks_by_diagonal_size():
    T = OperatorMatrix.diagonal(2, lambda i: Fraction(1) if i.n % 2 == 0 else Fraction(1, 4))
    colored = color_blocks(T, identity_basis(2))
    assert set(colored.color_class(T_LARGE)) == {ROOT} | set(dyadic_tree(2)[3:])
    assert set(colored.color_class(C_LARGE)) == {L, R}
    assert colored.class_measure(C_LARGE) == 1
    assert colored.diagonals[L] == Fraction(1, 8)


def test_gg_select_skips_a_level_of_the_other_color():
    basis = identity_basis(2)
    colors = {i: T_LARGE if i.n % 2 == 0 else C_LARGE for i in basis.indices}
    selection = gg_select(ColoredBlocks(basis, colors, diagonals={}), index_depth=1)
    assert selection.color == T_LARGE
    assert selection.root == ROOT
    assert selection.levels == {ROOT: 0, L: 2, R: 2}
    assert selection.selector[R] == (DyadicInterval(2, 2), DyadicInterval(2, 3))
    composed = reiterate(basis.family, selection.selector)
    assert check_jones(composed).kappa == 1


def test_gg_select_takes_half_levels_of_an_interleaved_coloring():
    basis = identity_basis(2)
    colors = {
        ROOT: T_LARGE,
        L: C_LARGE,
        R: C_LARGE,
        DyadicInterval(2, 0): T_LARGE,
        DyadicInterval(2, 1): C_LARGE,
        DyadicInterval(2, 2): T_LARGE,
        DyadicInterval(2, 3): C_LARGE,
    }
    selection = gg_select(ColoredBlocks(basis, colors, diagonals={}), index_depth=1)
    assert selection.color == T_LARGE
    assert selection.levels == {ROOT: 0, L: 2, R: 2}
    assert selection.selector[L] == (DyadicInterval(2, 0),)
    assert selection.selector[R] == (DyadicInterval(2, 2),)
    assert selection.kappa == 1


def test_gg_select_on_a_position_parity_coloring():
    basis = identity_basis(6)
    colors = {i: T_LARGE if i.k % 2 == 0 else C_LARGE for i in basis.indices}
    colored = ColoredBlocks(basis, colors, diagonals={})
    shares = level_shares(colored)
    assert all(shares[T_LARGE][n] == Fraction(1, 2) for n in range(1, 7))

    selection = gg_select(colored, index_depth=1)
    assert selection.color == T_LARGE
    assert selection.achieved == {T_LARGE: 1, C_LARGE: 1}
    assert selection.selector == {ROOT: (ROOT,), L: (DyadicInterval(1, 0),), R: (DyadicInterval(2, 2),)}
    report = check_jones(selector_family(basis.family, selection.selector))
    assert report.satisfied
    assert report.kappa == selection.kappa == 1


def test_gg_select_reports_a_level_without_majority():
    basis = identity_basis(1)
    colors = {ROOT: C_LARGE, L: C_LARGE, R: T_LARGE}
    with pytest.raises(InfeasibleWithinDepth) as info:
        gg_select(ColoredBlocks(basis, colors, diagonals={}), index_depth=1)
    report = info.value.report
    assert report["stage"] == "gg_select"
    assert report["achievable_depth"] == {T_LARGE: 0, C_LARGE: 0}
    assert report["level_shares"][T_LARGE] == {"0": "0", "1": "1/2"}


def test_identity_factors_through_T():
    T = OperatorMatrix.identity(12)
    choice, report = factor_primary(T, eta=1, index_depth=1, block_depth=2)
    assert choice == CHOICE_T
    assert report.result.residual == 0
    assert report.result.norm_product_bound <= 3
    data = report.to_json()
    assert data["kind"] == "primary"
    assert data["eta0"] == "1/30"
    assert replay_primary(T, data).passed


def test_zero_factors_through_the_complement():
    choice, report = factor_primary(OperatorMatrix.zero(12), eta=1, index_depth=1, block_depth=2)
    assert choice == CHOICE_ID_MINUS_T
    assert report.result.residual == 0


def test_half_identity_is_T_large_everywhere():
    choice, report = factor_primary(OperatorMatrix.identity(6, scale=Fraction(1, 2)), eta=1, index_depth=1, block_depth=2)
    assert choice == CHOICE_T
    assert not report.colored.color_class(C_LARGE)
    assert report.delta_effective == Fraction(1, 2)


@pytest.mark.parametrize("seed", range(10))
def test_projection_masks_factor(seed):
    T = generate(GeneratorSpec("projection_mask", 12, mask_level=2, seed=seed))
    choice, report = factor_primary(T, eta=1, index_depth=1, block_depth=2)
    assert choice in (CHOICE_T, CHOICE_ID_MINUS_T)
    assert report.result.norm_product_bound <= 3
    assert report.result.residual == 0
    assert replay_primary(T, report.to_json(emit_matrices=True)).passed


def test_primary_preconditions():
    with pytest.raises(PreconditionError):
        factor_primary(OperatorMatrix.identity(6), eta=1, index_depth=2, block_depth=1)
    with pytest.raises(PreconditionError):
        factor_primary(OperatorMatrix.identity(6), eta=0, index_depth=1)


def test_tampered_primary_report_is_caught():
    T = OperatorMatrix.identity(6)
    _, report = factor_primary(T, eta=1, index_depth=1, block_depth=2)
    data = report.to_json()
    data["factorization"]["norm_product_bound"] = "5"
    replay = replay_primary(T, data)
    assert not replay.passed
    assert "norm_bound" in {f["check"] for f in replay.failures}
