#!/usr/bin/env python
"""
Dot product versus E-product on a small diagonal neuron set.

Against the test point (6, 6) the dot product grows with magnitude and
prefers the farthest neuron (9, 9), while the E-product peaks at the
nearest aligned neuron (5, 5).
"""

from typing import List, Sequence, Tuple

from pydantic import BaseModel

from neural_matter_kit.yat.products import DEFAULT_EPSILON, yat_product

TEST_POINT = (6.0, 6.0)
NEURONS = (
    (1.0, 1.0),
    (2.0, 2.0),
    (3.0, 3.0),
    (4.0, 4.0),
    (5.0, 5.0),
    (8.0, 8.0),
    (9.0, 9.0),
)


class RankingRow(BaseModel):
    neuron: Tuple[float, float]
    dot: float
    yat: float
    dot_rank: int
    yat_rank: int


class RankingTable(BaseModel):
    test_point: Tuple[float, float]
    epsilon: float
    rows: List[RankingRow]

    @property
    def dot_argmax(self) -> Tuple[float, float]:
        return next(row.neuron for row in self.rows if row.dot_rank == 1)

    @property
    def yat_argmax(self) -> Tuple[float, float]:
        return next(row.neuron for row in self.rows if row.yat_rank == 1)

    def to_text(self) -> str:
        lines = [
            f"test point {self.test_point}",
            f"{'neuron':>12} {'dot':>10} {'rank':>5} {'yat':>16} {'rank':>5}",
        ]
        for row in self.rows:
            neuron = f"({row.neuron[0]:g}, {row.neuron[1]:g})"
            lines.append(
                f"{neuron:>12} {row.dot:>10.4g} {row.dot_rank:>5} "
                f"{row.yat:>16.10g} {row.yat_rank:>5}"
            )
        lines.append(f"dot argmax {self.dot_argmax}, yat argmax {self.yat_argmax}")
        return "\n".join(lines)

    def to_csv_rows(self) -> List[List[str]]:
        header = ["neuron_x", "neuron_y", "dot", "dot_rank", "yat", "yat_rank"]
        body = [
            [
                repr(r.neuron[0]),
                repr(r.neuron[1]),
                repr(r.dot),
                str(r.dot_rank),
                repr(r.yat),
                str(r.yat_rank),
            ]
            for r in self.rows
        ]
        return [header] + body


def _ranks(values: Sequence[float]) -> List[int]:
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0] * len(values)
    for position, index in enumerate(order, start=1):
        ranks[index] = position
    return ranks


def ranking_table(
    test_point: Tuple[float, float] = TEST_POINT,
    neurons: Sequence[Tuple[float, float]] = NEURONS,
    epsilon: float = DEFAULT_EPSILON,
) -> RankingTable:
    """Score each neuron against the test point with both products; rank 1 is best."""
    dots = [float(n[0] * test_point[0] + n[1] * test_point[1]) for n in neurons]
    yats = [yat_product(n, test_point, epsilon) for n in neurons]
    dot_ranks = _ranks(dots)
    yat_ranks = _ranks(yats)
    rows = [
        RankingRow(neuron=tuple(n), dot=d, yat=y, dot_rank=dr, yat_rank=yr)
        for n, d, y, dr, yr in zip(neurons, dots, yats, dot_ranks, yat_ranks)
    ]
    return RankingTable(test_point=tuple(test_point), epsilon=epsilon, rows=rows)
