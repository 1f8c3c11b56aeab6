"""Dense linear algebra, deterministic RNG, initializers and PCA."""

__all__ = [
    "Matrix",
    "Vector",
    "as_matrix",
    "as_vector",
    "ensure_finite",
    "ensure_all_finite",
    "mat_mul",
    "DrawKind",
    "RngState",
    "rng_draw",
    "rng_normal_matrix",
    "rng_permutation",
    "orthogonal_init",
    "pca_2d",
]

from .matrix import (
    Matrix,
    Vector,
    as_matrix,
    as_vector,
    ensure_all_finite,
    ensure_finite,
    mat_mul,
)
from .rng import DrawKind, RngState, rng_draw, rng_normal_matrix, rng_permutation
from .init import orthogonal_init
from .pca import pca_2d
