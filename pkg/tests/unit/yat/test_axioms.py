#!/usr/bin/env python
"""
Unit tests for the metric-axiom checker.
"""

import json

import pytest

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.yat.axioms import (
    AXIOMS,
    MAX_COUNTEREXAMPLES,
    AxiomReport,
    axiom_check,
    default_seeded_cases,
    evaluate_case,
)
from neural_matter_kit.yat.products import Measure

TRIANGLE_TRIPLE = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.1, 0.0]]


class TestAxiomCheck:
    """Tests for axiom_check."""

    def test_e_is_non_negative_and_symmetric(self):
        report, _ = axiom_check(Measure.E, 2000, 4, RngState(0))
        assert report.violations["non_negativity"] == 0
        assert report.violations["symmetry"] == 0

    def test_e_fails_identity(self):
        report, _ = axiom_check(Measure.E, 100, 3, RngState(0))
        assert report.violations["identity_forward"] > 0

    def test_seeded_triangle_violation(self):
        report, _ = axiom_check(
            Measure.E, 10, 3, RngState(1), seeded_cases=[TRIANGLE_TRIPLE]
        )
        assert report.violations["triangle"] >= 1
        seeded = [
            c for c in report.counterexamples if c.seeded and c.axiom == "triangle"
        ]
        assert seeded
        assert seeded[0].values["d(x,z)"] == pytest.approx(1 / (0.01 + 1e-6), rel=1e-9)

    def test_ebar_identity_forward_holds(self):
        twins = [[3.0, 4.0], [3.0, 4.0]]
        report, _ = axiom_check(
            Measure.EBAR, 1000, 3, RngState(2), seeded_cases=[twins]
        )
        assert report.violations["identity_forward"] == 0

    def test_counterexamples_are_capped(self):
        report, _ = axiom_check(
            Measure.E, 5000, 3, RngState(3), seeded_cases=default_seeded_cases()
        )
        assert len(report.counterexamples) <= MAX_COUNTEREXAMPLES
        assert set(report.violations) == set(AXIOMS)

    def test_is_deterministic(self):
        first, state_a = axiom_check(Measure.E, 500, 3, RngState(4))
        second, state_b = axiom_check(Measure.E, 500, 3, RngState(4))
        assert first == second
        assert state_a == state_b

    def test_report_json_round_trip(self):
        report, _ = axiom_check(
            Measure.E, 50, 3, RngState(5), seeded_cases=[TRIANGLE_TRIPLE]
        )
        data = json.loads(report.model_dump_json())
        assert data["measure"] == "e"
        assert AxiomReport.model_validate(data) == report

    @pytest.mark.parametrize("samples, dim", [(0, 3), (10, 1)])
    def test_rejects_bad_arguments(self, samples, dim):
        with pytest.raises(DomainError):
            axiom_check(Measure.E, samples, dim, RngState(0))


def test_evaluate_case_pair_has_no_triangle():
    results = evaluate_case(Measure.E, [[1.0, 0.0], [0.0, 1.0]], 1e-6)
    assert "triangle" not in results
    assert results["identity_reverse"][0] is True
