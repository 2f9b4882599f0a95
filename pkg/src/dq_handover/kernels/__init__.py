"""Modules to deal with kernels over poses and their Gram matrices."""

from dq_handover.kernels.gram import (
    GramMatrix,
    JitterPolicy,
    clip_spectrum,
    factorise,
    gram,
    kernel_matrix,
    min_eigenvalue,
    pairwise_d_mag,
    pairwise_distances,
    query_distances,
)
from dq_handover.kernels.kernels import (
    Hyperparameters,
    k_arc,
    k_mag,
    k_product,
    k_se,
    squared_exponential,
)

__all__ = [
    "GramMatrix",
    "Hyperparameters",
    "JitterPolicy",
    "clip_spectrum",
    "factorise",
    "gram",
    "k_arc",
    "k_mag",
    "k_product",
    "k_se",
    "kernel_matrix",
    "min_eigenvalue",
    "pairwise_d_mag",
    "pairwise_distances",
    "query_distances",
    "squared_exponential",
]
