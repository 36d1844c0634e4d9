"""Tests for Haar vectors, the exact SL∞ norm and the H¹ estimates."""

import math
from fractions import Fraction

import pytest

from haar_factor.core.dyadic import ROOT, DyadicInterval, dyadic_tree, level_grid
from haar_factor.core.errors import DepthBudgetError, InputFormatError, InvalidIntervalError
from haar_factor.core.haar_space import (
    HaarVector,
    convex_ascent,
    h1_norm,
    inner_product,
    leaf_profile,
    project_levels,
    rademacher_pairing_bound,
    rademacher_square_sum,
    rademacher_vector,
    sl_inf_norm_sq,
    square_function_cells,
    sup_pairing_over_ball,
)


def h(n, k, value=1):
    return HaarVector.basis(DyadicInterval(n, k), value)


def test_zero_coefficients_are_not_stored():
    assert HaarVector({ROOT: 0}).is_zero()
    assert HaarVector({ROOT: 0}).depth == 0
    assert (h(2, 0) - h(2, 0)).is_zero()
    assert len(h(0, 0) + h(3, 1)) == 2
    assert (h(0, 0) + h(3, 1)).depth == 3


def test_keys_must_be_intervals():
    with pytest.raises(InvalidIntervalError):
        HaarVector({(0, 0): 1})


def test_vector_arithmetic():
    f = h(0, 0, 2) + h(1, 1, Fraction(1, 3))
    assert f.get(ROOT) == 2
    assert f.get(DyadicInterval(1, 1)) == Fraction(1, 3)
    assert f.get(DyadicInterval(1, 0)) == 0
    assert (f * 3).get(DyadicInterval(1, 1)) == 1
    assert -f + f == HaarVector.zero()
    assert f.restrict([ROOT]) == h(0, 0, 2)
    assert f.flip_signs({ROOT: -1}) == h(0, 0, -2) + h(1, 1, Fraction(1, 3))
    assert f.flip_signs({ROOT: -1}).abs() == f
    assert f.support == [ROOT, DyadicInterval(1, 1)]
    assert f.levels() == {0, 1}


def test_inner_product_examples():
    assert inner_product(h(0, 0), h(0, 0)) == 1
    assert inner_product(h(1, 0), h(1, 1)) == 0
    assert inner_product(h(0, 0) + h(1, 0, 2), h(1, 0)) == 1
    assert inner_product(h(2, 3, 4), h(2, 3, 2)) == 2


def test_leaf_profile_examples():
    assert leaf_profile(h(0, 0), 1).values == (1, 1)
    assert leaf_profile(h(0, 0) + h(1, 0), 2).values == (2, 2, 1, 1)
    assert leaf_profile(HaarVector.zero(), 0).values == (0,)
    with pytest.raises(DepthBudgetError):
        leaf_profile(h(2, 0), 1)


def test_square_function_cells_partition_the_unit_interval(make_vector):
    for depth in range(6):
        f = make_vector(depth)
        cells = square_function_cells(f)
        assert sum(cell.measure for cell, _ in cells) == 1
        for (a, _), (b, _) in zip(cells, cells[1:]):
            assert a.right == b.left
    assert square_function_cells(HaarVector.zero()) == [(ROOT, 0)]


def test_sl_inf_norm_examples():
    assert sl_inf_norm_sq(h(0, 0)) == 1
    assert sl_inf_norm_sq(h(0, 0) + h(1, 0)) == 2
    assert sl_inf_norm_sq(HaarVector({i: 1 for i in level_grid(3)})) == 1
    assert sl_inf_norm_sq(HaarVector.zero()) == 0


def test_sl_inf_norm_matches_leaf_oracle(rng, make_vector):
    for _ in range(200):
        f = make_vector(rng.randint(0, 6))
        assert sl_inf_norm_sq(f) == leaf_profile(f, f.depth).maximum()


def test_sign_flips_preserve_the_norm(rng, make_vector):
    for _ in range(50):
        f = make_vector(5)
        signs = {i: rng.choice((1, -1)) for i in dyadic_tree(5)}
        assert sl_inf_norm_sq(f.flip_signs(signs)) == sl_inf_norm_sq(f)


def test_h1_norm_examples():
    assert h1_norm(h(0, 0)).value == pytest.approx(1.0)
    assert h1_norm(h(0, 0) + h(1, 0)).value == pytest.approx((math.sqrt(2) + 1) / 2)
    assert h1_norm(h(1, 0)).value == pytest.approx(0.5)
    zero = h1_norm(HaarVector.zero())
    assert zero.value == 0.0
    assert zero.error > 0


def test_h1_norm_matches_leaf_sum(rng, make_vector):
    for _ in range(100):
        f = make_vector(rng.randint(0, 6))
        profile = leaf_profile(f, f.depth)
        oracle = math.fsum(math.sqrt(float(v)) for v in profile.values) / 2 ** profile.depth
        estimate = h1_norm(f)
        assert abs(estimate.value - oracle) <= estimate.error + 1e-12
        assert estimate.upper_fraction() >= Fraction(estimate.value)


def test_bracket_is_bounded_by_norms(rng, make_vector):
    """⟨f, g⟩² ≤ ‖f‖²_SL∞ · ‖g‖²_H¹ on random pairs."""
    for _ in range(500):
        f = make_vector(rng.randint(0, 6))
        g = make_vector(rng.randint(0, 6))
        bound = sl_inf_norm_sq(f) * h1_norm(g).upper_fraction() ** 2
        assert inner_product(f, g) ** 2 <= bound


def test_rademacher_vectors():
    r = rademacher_vector(1, {DyadicInterval(1, 0): 1, DyadicInterval(1, 1): 1})
    assert r == h(1, 0) + h(1, 1)
    assert sl_inf_norm_sq(r) == 1
    alternating = rademacher_vector(2, {i: (-1) ** i.k for i in level_grid(2)})
    assert sl_inf_norm_sq(alternating) == 1
    with pytest.raises(InvalidIntervalError):
        rademacher_vector(1, {DyadicInterval(2, 0): 1})


def test_rademacher_pairing_bound_is_attained(rng, make_vector):
    for _ in range(50):
        f = make_vector(4)
        m = rng.randint(0, 4)
        signs = {i: 1 if f.get(i) >= 0 else -1 for i in level_grid(m)}
        r = rademacher_vector(m, signs)
        assert sl_inf_norm_sq(r) == 1
        assert inner_product(f, r) == rademacher_pairing_bound(f, m)


def test_rademacher_square_sum_is_bounded_by_the_norm(make_vector):
    for _ in range(100):
        f = make_vector(5)
        assert rademacher_square_sum(f, 5) <= sl_inf_norm_sq(f)


def test_project_levels():
    f = h(0, 0) + h(1, 0)
    assert project_levels(f, {0}) == h(0, 0)
    assert project_levels(f, range(5)) == f
    assert project_levels(f, ()).is_zero()


def test_projection_onto_levels_does_not_increase_the_norm(rng, make_vector):
    for _ in range(100):
        f = make_vector(5)
        levels = {m for m in range(6) if rng.random() < 0.5}
        assert sl_inf_norm_sq(project_levels(f, levels)) <= sl_inf_norm_sq(f)


def test_sup_pairing_examples():
    for method in ("h1_bound", "convex_ascent"):
        assert sup_pairing_over_ball(h(1, 0), method).value == pytest.approx(0.5)
        assert sup_pairing_over_ball(h(1, 0) + h(1, 1), method).value == pytest.approx(1.0)
        assert sup_pairing_over_ball(HaarVector.zero(), method).value == 0.0
    with pytest.raises(ValueError):
        sup_pairing_over_ball(h(0, 0), "simplex")


def test_convex_ascent_stays_below_its_upper_bounds(rng, make_vector):
    for _ in range(60):
        c = make_vector(rng.randint(0, 5))
        estimate = convex_ascent(c, iterations=200)
        assert estimate.value <= h1_norm(c).upper + 1e-9
        assert estimate.value <= estimate.dual_bound + 1e-9
        assert estimate.method == "convex_ascent"


def test_vector_json():
    f = HaarVector({DyadicInterval(2, 1): Fraction(1, 3), ROOT: -2})
    assert HaarVector.from_json(f.to_json()) == f
    assert f.to_json()["coeffs"][0] == {"n": 0, "k": 0, "value": "-2"}
    with pytest.raises(InputFormatError):
        HaarVector.from_json({"coeffs": [{"n": 0, "k": 0, "value": "1/0"}]})
    with pytest.raises(InputFormatError):
        HaarVector.from_json({"coeffs": [{"n": 0, "k": 0}]})
    with pytest.raises(InputFormatError):
        HaarVector.from_json([1, 2])
