"""Exact tools for saturated fractions of factorial designs."""

__version__ = "0.1.0"

from .exactmat import IntMatrix, determinant, rank
from .model import (FactorialDesign, Fraction, ModelSpec, build_model_matrix, design_matrix_A,
                    full_design, model_design_matrix, model_with_interactions)
from .circuits import CircuitBasis, CircuitVector, circuits_of, enumerate_circuits, symmetry_classes
from .graver import graver_basis
from .saturation import (count_saturated, export_ilp, is_saturated_by_circuits,
                         is_saturated_by_determinant)
from .unimodular import is_totally_unimodular, is_unimodular, lawrence_lifting
from .sampler import ChainConfig, margin_matrix, random_psubset_sample, sample_saturated, universal_moves
