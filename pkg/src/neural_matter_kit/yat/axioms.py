#!/usr/bin/env python
"""
Empirical metric-axiom checker for the E and Ē products.

Random standard-normal triples are drawn and every axiom is evaluated on
the raw measure values d := E or Ē. A violation of "lhs <= rhs" is declared
when lhs > rhs + 1e-9 · max(1, |rhs|). The checker only reports; nothing
about the axioms is assumed.
"""

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix
from neural_matter_kit.yat.products import (
    DEFAULT_EPSILON,
    Measure,
    measure_rows,
    measure_value,
)

logger = logging.getLogger(__name__)

AXIOMS = (
    "non_negativity",
    "symmetry",
    "identity_forward",
    "identity_reverse",
    "triangle",
)
MAX_COUNTEREXAMPLES = 10
RELATIVE_TOLERANCE = 1e-9


class Counterexample(BaseModel):
    """A stored violation with the vectors and the values that broke the axiom."""
    axiom: str = Field(..., description="Name of the violated axiom")
    vectors: List[List[float]] = Field(..., description="The violating pair or triple")
    values: Dict[str, float] = Field(..., description="Values used in the comparison")
    seeded: bool = Field(False, description="Whether the case was seeded")


class AxiomReport(BaseModel):
    """Per-axiom violation counts for one measure."""
    measure: Measure
    samples: int
    dim: int
    epsilon: float
    violations: Dict[str, int] = Field(
        default_factory=lambda: {name: 0 for name in AXIOMS}
    )
    counterexamples: List[Counterexample] = Field(default_factory=list)


def _exceeds(lhs: float, rhs: float) -> bool:
    return lhs > rhs + RELATIVE_TOLERANCE * max(1.0, abs(rhs))


def evaluate_case(
    measure: Measure, vectors: Sequence[Sequence[float]], epsilon: float
) -> Dict[str, Tuple[bool, Dict[str, float]]]:
    """
    Evaluate every axiom applicable to a pair or triple by direct computation.

    Returns:
        Mapping axiom -> (violated, values used)
    """
    x = np.asarray(vectors[0], dtype=np.float64)
    y = np.asarray(vectors[1], dtype=np.float64)
    dxy = measure_value(measure, x, y, epsilon)
    dyx = measure_value(measure, y, x, epsilon)
    dxx = measure_value(measure, x, x, epsilon)
    results: Dict[str, Tuple[bool, Dict[str, float]]] = {
        "non_negativity": (dxy < 0.0, {"d(x,y)": dxy}),
        "symmetry": (
            abs(dxy - dyx) > RELATIVE_TOLERANCE * max(1.0, abs(dxy)),
            {"d(x,y)": dxy, "d(y,x)": dyx},
        ),
        "identity_forward": (_exceeds(dxx, 0.0), {"d(x,x)": dxx}),
        "identity_reverse": (
            abs(dxy) <= RELATIVE_TOLERANCE and not np.array_equal(x, y),
            {"d(x,y)": dxy},
        ),
    }
    if len(vectors) >= 3:
        z = np.asarray(vectors[2], dtype=np.float64)
        dxz = measure_value(measure, x, z, epsilon)
        dyz = measure_value(measure, y, z, epsilon)
        results["triangle"] = (
            _exceeds(dxz, dxy + dyz),
            {"d(x,z)": dxz, "d(x,y)": dxy, "d(y,z)": dyz},
        )
    return results


def _record(
    report: AxiomReport,
    measure: Measure,
    vectors: Sequence[np.ndarray],
    epsilon: float,
    seeded: bool,
) -> None:
    """Tally and store the violations of one case after direct re-evaluation."""
    for axiom, (violated, values) in evaluate_case(measure, vectors, epsilon).items():
        if not violated:
            continue
        report.violations[axiom] += 1
        if len(report.counterexamples) < MAX_COUNTEREXAMPLES:
            report.counterexamples.append(
                Counterexample(
                    axiom=axiom,
                    vectors=[np.asarray(v, dtype=np.float64).tolist() for v in vectors],
                    values=values,
                    seeded=seeded,
                )
            )


def axiom_check(
    measure: Measure,
    samples: int,
    dim: int,
    state: RngState,
    seeded_cases: Sequence[Sequence[Sequence[float]]] = (),
    epsilon: float = DEFAULT_EPSILON,
) -> Tuple[AxiomReport, RngState]:
    """
    Count metric-axiom violations of a similarity measure.

    Seeded cases are evaluated first so that they are always among the
    stored counterexamples. Random triples are evaluated in vectorised form;
    counterexamples from them are re-computed with the scalar product before
    being stored.

    Args:
        measure: E or Ē
        samples: Number of random triples (each also yields a pair)
        dim: Dimension of the random vectors
        state: RNG state
        seeded_cases: Extra pairs / triples to evaluate
        epsilon: Stabiliser of the measure

    Returns:
        Tuple of (AxiomReport, advanced state)

    Raises:
        DomainError: If dim < 2 or samples < 1
    """
    measure = Measure(measure)
    if dim < 2:
        raise DomainError(f"axiom_check needs dim >= 2, got {dim}")
    if samples < 1:
        raise DomainError(f"axiom_check needs samples >= 1, got {samples}")

    report = AxiomReport(measure=measure, samples=samples, dim=dim, epsilon=epsilon)
    for case in seeded_cases:
        vectors = [np.asarray(v, dtype=np.float64) for v in case]
        _record(report, measure, vectors, epsilon, seeded=True)

    draws, state = rng_normal_matrix(state, 3 * samples, dim)
    x, y, z = draws[:samples], draws[samples : 2 * samples], draws[2 * samples :]
    dxy = measure_rows(measure, x, y, epsilon)
    dyx = measure_rows(measure, y, x, epsilon)
    dxx = measure_rows(measure, x, x, epsilon)
    dxz = measure_rows(measure, x, z, epsilon)
    dyz = measure_rows(measure, y, z, epsilon)

    tol = RELATIVE_TOLERANCE
    flagged = {
        "non_negativity": dxy < 0.0,
        "symmetry": np.abs(dxy - dyx) > tol * np.maximum(1.0, np.abs(dxy)),
        "identity_forward": dxx > tol,
        "identity_reverse": (np.abs(dxy) <= tol) & np.any(x != y, axis=1),
        "triangle": dxz > (dxy + dyz) + tol * np.maximum(1.0, np.abs(dxy + dyz)),
    }
    for axiom in AXIOMS:
        mask = flagged[axiom]
        report.violations[axiom] += int(np.count_nonzero(mask))
        for index in np.flatnonzero(mask):
            if len(report.counterexamples) >= MAX_COUNTEREXAMPLES:
                break
            vectors = [x[index], y[index], z[index]]
            checked = evaluate_case(measure, vectors, epsilon)
            violated, values = checked.get(axiom, (False, {}))
            if violated:
                report.counterexamples.append(
                    Counterexample(
                        axiom=axiom,
                        vectors=[v.tolist() for v in vectors],
                        values=values,
                    )
                )
    logger.info(
        f"Axiom check for {measure.value}: {samples} samples in dim {dim}, "
        f"violations {report.violations}"
    )
    return report, state


def default_seeded_cases() -> List[List[List[float]]]:
    """Hand-picked cases: a triangle-breaking triple plus orthogonal and equal pairs."""
    return [
        [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.1, 0.0]],
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[3.0, 4.0, 0.0], [3.0, 4.0, 0.0]],
    ]
