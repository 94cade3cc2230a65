"""Numerical engine for constructive KAM iteration on short-range lattice
Hamiltonians: weighted-norm bookkeeping, sparse Fourier-Taylor algebra,
homological-equation solves, Lie-series canonical transformations, the
iteration driver, and resonance-measure estimation."""

from .kernels import BACKEND as KERNEL_BACKEND
from .norms import (
    ActionVector,
    LatticeMatrix,
    WeightProfile,
    action_norm,
    induced_operator_norm,
    sup_matrix_norm,
    sup_norm,
)
from .series import (
    FTSeries,
    average,
    poisson_bracket,
    series_product,
    split_by_degree,
    truncate_fourier,
)

__version__ = "0.1.0"

__all__ = [
    "ActionVector",
    "FTSeries",
    "KERNEL_BACKEND",
    "LatticeMatrix",
    "WeightProfile",
    "action_norm",
    "average",
    "induced_operator_norm",
    "poisson_bracket",
    "series_product",
    "split_by_degree",
    "sup_matrix_norm",
    "sup_norm",
    "truncate_fourier",
]
