"""E/Ē products, scale factor, probability heads, axiom checker and FLOP model."""

__all__ = [
    "DEFAULT_EPSILON",
    "Measure",
    "ScaleMode",
    "yat_product",
    "posi_yat_product",
    "cosine_similarity",
    "scale_theta",
    "pairwise_yat_matrix",
    "SoftermaxPolicy",
    "softermax",
    "softmax",
    "AxiomReport",
    "axiom_check",
    "FlopCounts",
    "flop_model",
    "product_flop_table",
]

from .products import (
    DEFAULT_EPSILON,
    Measure,
    ScaleMode,
    cosine_similarity,
    pairwise_yat_matrix,
    posi_yat_product,
    scale_theta,
    yat_product,
)
from .normalize import SoftermaxPolicy, softermax, softmax
from .axioms import AxiomReport, axiom_check
from .flops import FlopCounts, flop_model, product_flop_table
