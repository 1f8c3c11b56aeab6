#!/usr/bin/env python
"""
Unit tests for the finite-difference gradient checks.
"""

import pytest

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.train.gradcheck import (
    GRAD_CASES,
    grad_check,
    relative_error,
)

TOLERANCE = 1e-4


@pytest.mark.parametrize("case", sorted(set(GRAD_CASES) - {"e_vit_block"}))
def test_analytic_gradients_agree(case):
    report, _ = grad_check(case, trials=3, tolerance=TOLERANCE, state=RngState(11))
    assert report.passed, (
        f"{case}: max rel err {report.max_rel_err:.3e} in {report.worst_tensor}"
    )
    assert report.max_rel_err < TOLERANCE
    assert report.checked > 0


def test_full_width_encoder_block():
    report, _ = grad_check(
        "e_vit_block", trials=1, tolerance=TOLERANCE, state=RngState(5)
    )
    assert report.passed
    assert report.case == "e_vit_block"


def test_relative_error_floor():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1e-9, 0.0) == pytest.approx(0.1)
    assert relative_error(2.0, 1.0) == pytest.approx(0.5)


def test_unknown_case():
    with pytest.raises(DomainError):
        grad_check("no_such_case", trials=1, tolerance=TOLERANCE, state=RngState(0))


def test_trials_must_be_positive():
    with pytest.raises(DomainError):
        grad_check("dense_linear", trials=0, tolerance=TOLERANCE, state=RngState(0))
