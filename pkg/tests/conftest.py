"""
Shared fixtures: a seeded random source and factories for sparse vectors,
operators and Gamlen-Gaudet families.
"""

import json
import random
from fractions import Fraction

import pytest

from haar_factor.core.dyadic import ROOT, dyadic_tree
from haar_factor.core.haar_space import HaarVector
from haar_factor.core.jones import IntervalFamily
from haar_factor.core.operators import OperatorMatrix
from haar_factor.core.quasi_diag import LEFT, RIGHT, gamlen_gaudet_children


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def make_vector(rng):
    def factory(depth, density=0.5, spread=4):
        coeffs = {}
        for interval in dyadic_tree(depth):
            if rng.random() < density:
                coeffs[interval] = Fraction(rng.randint(-spread, spread), rng.randint(1, spread))
        return HaarVector(coeffs)

    return factory


@pytest.fixture
def make_operator(rng):
    """Sparse operators with small random entries; ``diagonal`` adds a fixed diagonal."""

    def factory(depth, density=0.1, diagonal=None, spread=8):
        tree = dyadic_tree(depth)
        entries = {}
        for col in tree:
            if diagonal is not None:
                entries[(col, col)] = Fraction(diagonal)
            for row in tree:
                if row != col and rng.random() < density:
                    entries[(row, col)] = Fraction(rng.randint(-spread, spread), 8 * spread)
        return OperatorMatrix(depth, entries)

    return factory


@pytest.fixture
def make_gg_family(rng):
    """
    Families over 𝒟^d whose blocks are exact Gamlen-Gaudet covers.

    ``steps[g]`` bounds the extra level gap between generation g and g + 1.
    Such families satisfy the Jones conditions with κ = 1.
    """

    def factory(index_depth, start=1, steps=(2,)):
        blocks, levels = {}, {}
        for index in dyadic_tree(index_depth):
            parent = index.parent()
            if parent is None:
                level = rng.randint(0, start)
                blocks[index] = ROOT.descendants_at(level)
            else:
                side = LEFT if index.is_left_child() else RIGHT
                step = steps[min(parent.n, len(steps) - 1)]
                level = levels[parent] + 1 + rng.randint(0, step - 1)
                blocks[index] = gamlen_gaudet_children(blocks[parent], side, level)
            levels[index] = level
        return IntervalFamily(blocks)

    return factory


@pytest.fixture
def write_file(tmp_path):
    def writer(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return writer
