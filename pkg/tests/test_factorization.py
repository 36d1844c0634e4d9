"""Tests for the almost inverse, the Neumann series and the identity factorization."""

from fractions import Fraction

import pytest

from haar_factor.core.block_ops import SignAssignment, build_block_basis
from haar_factor.core.dyadic import ROOT, DyadicInterval, dyadic_tree
from haar_factor.core.errors import InfeasibleWithinDepth, PreconditionError
from haar_factor.core.factorization import (
    build_U,
    check_contraction,
    choose_eta_prime,
    factor_identity,
    neumann_invert,
    replay_factorization,
    structural_contraction,
)
from haar_factor.core.generators import GeneratorSpec, generate
from haar_factor.core.haar_space import sl_inf_norm_sq
from haar_factor.core.jones import IntervalFamily
from haar_factor.core.operators import OperatorMatrix

L, R = DyadicInterval(1, 0), DyadicInterval(1, 1)


@pytest.mark.parametrize(
    "delta, eta, expected",
    [(1, 1, Fraction(1, 8)), (Fraction(1, 2), 1, Fraction(1, 16)), (2, 1, Fraction(1, 4))],
)
def test_choose_eta_prime(delta, eta, expected):
    eta_prime = choose_eta_prime(delta, eta)
    assert eta_prime == expected
    ratio = 4 * eta_prime / Fraction(delta)
    assert 1 / (1 - ratio) <= 1 + Fraction(eta)


def test_choose_eta_prime_rejects_nonpositive_input():
    with pytest.raises(PreconditionError):
        choose_eta_prime(0, 1)
    with pytest.raises(PreconditionError):
        choose_eta_prime(1, 0)


def test_neumann_series_of_a_scaled_identity():
    tol = Fraction(1, 2 ** 20)
    inverse = neumann_invert(OperatorMatrix.identity(2, scale=Fraction(1, 2)), Fraction(1, 2), tol)
    assert inverse.terms == 20
    assert inverse.matrix.entry(ROOT, ROOT) == 2 - tol
    assert inverse.tail_bound == tol
    assert inverse.rounding_bound == 0


def test_neumann_series_stops_on_a_nilpotent_defect():
    M = OperatorMatrix.identity(1) + OperatorMatrix(1, {(L, ROOT): Fraction(1, 4)})
    inverse = neumann_invert(M, Fraction(1, 4))
    assert inverse.terms == 1
    assert inverse.tail_bound == 0
    assert inverse.matrix.compose(M) == OperatorMatrix.identity(1)


def test_neumann_series_needs_a_contraction():
    with pytest.raises(PreconditionError):
        neumann_invert(OperatorMatrix.identity(1), 1)
    with pytest.raises(PreconditionError):
        neumann_invert(OperatorMatrix.identity(1), Fraction(1, 2), tol=0)


def test_neumann_series_meets_its_tolerance(make_operator, make_vector):
    tol = Fraction(1, 2 ** 10)
    c = Fraction(1, 4)
    for _ in range(10):
        E = make_operator(3, density=0.2)
        mass = E.total_mass()
        if mass:
            E = E.scale(c / mass)
        M = OperatorMatrix.identity(3) + E
        inverse = neumann_invert(M, c, tol)
        defect = inverse.matrix.compose(M) - OperatorMatrix.identity(3)
        f = make_vector(3)
        assert sl_inf_norm_sq(defect.apply(f)) <= tol * tol * sl_inf_norm_sq(f)


def test_almost_inverse_undoes_a_diagonal_operator():
    T = OperatorMatrix.identity(3, scale=2)
    basis = build_block_basis(IntervalFamily.identity(1), SignAssignment.all_plus(dyadic_tree(1)))
    U = build_U(T, basis)
    assert set(U.weights.values()) == {Fraction(1, 2)}
    assert U.norm_bound == Fraction(1, 2)
    for index in basis.indices:
        b = basis.vector(index)
        assert U.apply(T.apply(b)) == b


def test_check_contraction():
    indices = dyadic_tree(2)
    failing = check_contraction(OperatorMatrix.identity(2, scale=2), Fraction(1, 2), indices)
    assert not failing.passed
    assert failing.exhaustive == 2 ** 7
    passing = check_contraction(OperatorMatrix.identity(2), Fraction(0), indices)
    assert passing.passed
    assert passing.max_ratio == 0


def test_structural_contraction():
    assert structural_contraction({ROOT: Fraction(1, 10)}, {ROOT: Fraction(1, 2)}) == Fraction(1, 5)


def test_identity_factors_exactly():
    result = factor_identity(OperatorMatrix.identity(4), delta=1, eta=1, index_depth=1)
    assert result.residual == 0
    assert result.norm_product_bound <= 2
    assert result.eta_prime == Fraction(1, 8)


def test_scaled_identity_gives_the_inverse_scale():
    result = factor_identity(OperatorMatrix.identity(4, scale=2), delta=2, eta=1, index_depth=1)
    assert result.S.entry(ROOT, ROOT) == Fraction(1, 2)
    assert result.residual == 0


def test_negative_diagonal_is_flipped():
    result = factor_identity(OperatorMatrix.identity(4, scale=-1), delta=1, eta=1, index_depth=1)
    assert len(result.certificate.diagonal_flips) == 31
    assert result.residual == 0


def test_haar_multiplier_factors_exactly():
    T = generate(GeneratorSpec("haar_multiplier", 6, delta=Fraction(1, 2), seed=3))
    result = factor_identity(T, delta=Fraction(1, 2), eta=1, index_depth=2)
    assert result.residual == 0


def test_random_large_diagonal_factorization_replays():
    T = generate(
        GeneratorSpec("random_large_diagonal", 12, delta=Fraction(1, 2), off_diagonal_mass=Fraction(1, 10000), seed=7)
    )
    result = factor_identity(T, delta=Fraction(1, 2), eta=1, index_depth=2)
    assert result.contraction < 1
    assert result.norm_product_bound <= 4
    assert result.residual <= Fraction(1, 2 ** 60)
    assert replay_factorization(T, result.to_json(emit_matrices=True)).passed


def test_factorization_failures():
    with pytest.raises(InfeasibleWithinDepth):
        factor_identity(OperatorMatrix.identity(1), delta=1, eta=1, index_depth=1)
    with pytest.raises(PreconditionError):
        factor_identity(OperatorMatrix.identity(3), delta=2, eta=1, index_depth=1)


def test_tampered_contraction_is_caught():
    T = OperatorMatrix.identity(4)
    data = factor_identity(T, delta=1, eta=1, index_depth=1).to_json()
    assert replay_factorization(T, data).passed
    data["contraction"] = "1/3"
    replay = replay_factorization(T, data)
    assert not replay.passed
    assert "contraction_value" in {f["check"] for f in replay.failures}
