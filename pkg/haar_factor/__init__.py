"""
haar-factor

Desk-scale constructions for factoring the identity through operators on the
Haar system in SL∞, with exact rational certificates.
"""

__version__ = "0.1.0"

from .core import (
    BlockBasis,
    DyadicInterval,
    HaarVector,
    IntervalFamily,
    OperatorMatrix,
    factor_identity,
    factor_primary,
    quasi_diagonalize,
)
from .main import main

__all__ = [
    "DyadicInterval",
    "HaarVector",
    "IntervalFamily",
    "BlockBasis",
    "OperatorMatrix",
    "quasi_diagonalize",
    "factor_identity",
    "factor_primary",
    "main",
]
