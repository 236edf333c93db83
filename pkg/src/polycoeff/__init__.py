"""Coefficient matrices, maxrank and rank-bound experiments for small arithmetic circuits."""

from .algebra import GF, FieldSpec, Polynomial, analyze, format_poly, parse_poly
from .coeffmatrix import (MaxrankResult, PolyCoeffMatrix, ScalarMatrix, build_coeff_matrix,
                          build_partial_derivatives_matrix, coeff_matrix_under, matrix_rank,
                          maxrank, substitute_matrix)
from .partition import Partition, apply_partition, imm_partition, random_partition

__all__ = [
    "GF", "FieldSpec", "Polynomial", "analyze", "format_poly", "parse_poly",
    "MaxrankResult", "PolyCoeffMatrix", "ScalarMatrix", "build_coeff_matrix",
    "build_partial_derivatives_matrix", "coeff_matrix_under", "matrix_rank", "maxrank",
    "substitute_matrix", "Partition", "apply_partition", "imm_partition", "random_partition",
]
