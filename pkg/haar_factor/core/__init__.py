"""
Dyadic combinatorics, Haar-space norms and the factorization constructions.
"""

from .block_ops import BlockBasis, SignAssignment, build_block_basis
from .dyadic import ROOT, DyadicInterval, DyadicSet, dyadic_tree
from .errors import (
    HaarFactorError,
    InfeasibleWithinDepth,
    InputFormatError,
    PreconditionError,
    VerificationFailure,
)
from .factorization import FactorizationResult, factor_identity
from .generators import GeneratorSpec, generate
from .haar_space import HaarVector, h1_norm, sl_inf_norm_sq
from .jones import IntervalFamily, check_jones, reiterate
from .operators import OperatorMatrix
from .primarity import PrimaryReport, factor_primary
from .quasi_diag import DiagonalizationCertificate, quasi_diagonalize
from .trace import ConstructionTrace

__all__ = [
    'ROOT',
    'DyadicInterval',
    'DyadicSet',
    'dyadic_tree',
    'HaarVector',
    'h1_norm',
    'sl_inf_norm_sq',
    'IntervalFamily',
    'check_jones',
    'reiterate',
    'SignAssignment',
    'BlockBasis',
    'build_block_basis',
    'OperatorMatrix',
    'DiagonalizationCertificate',
    'quasi_diagonalize',
    'FactorizationResult',
    'factor_identity',
    'PrimaryReport',
    'factor_primary',
    'GeneratorSpec',
    'generate',
    'ConstructionTrace',
    'HaarFactorError',
    'InfeasibleWithinDepth',
    'InputFormatError',
    'PreconditionError',
    'VerificationFailure',
]
