#!/usr/bin/env python
"""
Shared fixtures for the unit tests.
"""

from typing import Callable

import numpy as np
import pytest

STEP = 1e-5


def central_difference(
    loss: Callable[[np.ndarray], float], point: np.ndarray, step: float = STEP
) -> np.ndarray:
    """Central-difference gradient of a scalar function of one array."""
    base = np.array(point, dtype=np.float64)
    grad = np.zeros_like(base)
    for index in np.ndindex(base.shape):
        plus = base.copy()
        minus = base.copy()
        plus[index] += step
        minus[index] -= step
        grad[index] = (loss(plus) - loss(minus)) / (2 * step)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


@pytest.fixture
def numeric_gradient():
    """Central-difference gradient helper (h = 1e-5)."""
    return central_difference


@pytest.fixture
def relative_error():
    """Maximum entrywise relative error with a 1e-8 denominator floor."""
    return max_relative_error
