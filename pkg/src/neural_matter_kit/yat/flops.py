#!/usr/bin/env python
"""
Analytic FLOP model for a traditional neuron versus an E-neuron.

    traditional(d) = 2d + 1    (dot product, bias, ReLU)
    yat(d)         = 5d − 1    (dot product plus ε-shifted squared distance)
"""

from typing import Dict

from pydantic import BaseModel, model_validator

from neural_matter_kit.errors import DomainError


class FlopCounts(BaseModel):
    d: int
    traditional: int
    yat: int
    ratio: float

    @model_validator(mode="after")
    def check_formulas(self) -> "FlopCounts":
        if self.traditional != 2 * self.d + 1 or self.yat != 5 * self.d - 1:
            raise ValueError(f"FLOP counts inconsistent with d={self.d}")
        return self


def flop_model(d: int) -> FlopCounts:
    """
    FLOPs per neuron for input dimension d.

    Raises:
        DomainError: If d < 1
    """
    if d < 1:
        raise DomainError(f"flop_model needs d >= 1, got {d}")
    traditional = 2 * d + 1
    yat = 5 * d - 1
    return FlopCounts(d=d, traditional=traditional, yat=yat, ratio=yat / traditional)


def product_flop_table(d: int) -> Dict[str, int]:
    """Per-product counts in the tabulated convention (dot counted as d)."""
    if d < 1:
        raise DomainError(f"product_flop_table needs d >= 1, got {d}")
    return {
        "dot": d,
        "euclidean": 3 * d,
        "cosine": 4 * d + 1,
        "yat": 5 * d - 1,
        "posi_yat": 5 * d - 1,
    }
