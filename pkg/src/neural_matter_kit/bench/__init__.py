#!/usr/bin/env python
"""
FLOP counting, layer throughput and the dot-versus-E comparison table.
"""

__all__ = [
    "BenchReport",
    "CountedFloat",
    "FlopCounter",
    "RankingTable",
    "bench_kernels",
    "ranking_table",
]

from .counter import CountedFloat, FlopCounter
from .kernels import BenchReport, bench_kernels
from .ranking import RankingTable, ranking_table
