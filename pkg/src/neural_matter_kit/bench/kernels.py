#!/usr/bin/env python
"""
FLOP-count verification and throughput of dot versus E-neuron layers.
"""

import logging
import platform
import statistics
import time
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from threadpoolctl import threadpool_limits

from neural_matter_kit.bench.counter import (
    COUNTING_CONVENTION,
    dot_neuron_flops,
    yat_neuron_flops,
)
from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix
from neural_matter_kit.nn.dense import dense_forward
from neural_matter_kit.nn.params import Activation, DenseParams, YatDenseParams
from neural_matter_kit.nn.yat_dense import yat_dense_forward
from neural_matter_kit.yat.flops import FlopCounts, flop_model

logger = logging.getLogger(__name__)

DEFAULT_DIMS = (16, 64, 256, 1024)
DEFAULT_REPS = 5
DEFAULT_THREADS = 1
BATCH = 256
NEURONS = 64
COMBINE_FLOPS = 2


class BenchRow(BaseModel):
    d: int
    counted_flops_dot_neuron: int
    counted_flops_yat_neuron: int = Field(
        ..., description="E-neuron reductions, compared with the model"
    )
    counted_flops_yat_combined: int = Field(
        ..., description="E-neuron including the square-and-divide"
    )
    model_flops: FlopCounts
    throughput_dot: float = Field(..., description="Neuron evaluations/s, dense layer")
    throughput_yat: float = Field(..., description="Neuron evaluations/s, yat layer")
    measured_ratio: float = Field(..., description="throughput_dot / throughput_yat")

    @model_validator(mode="after")
    def check_counts(self) -> "BenchRow":
        counted = (self.counted_flops_dot_neuron, self.counted_flops_yat_neuron)
        modelled = (self.model_flops.traditional, self.model_flops.yat)
        if counted != modelled:
            raise ValueError(
                f"counted FLOPs {counted} differ from the model {modelled} "
                f"at d={self.d}"
            )
        combined = self.counted_flops_yat_neuron + COMBINE_FLOPS
        if self.counted_flops_yat_combined != combined:
            raise ValueError(
                f"square-and-divide should add {COMBINE_FLOPS} FLOPs at d={self.d}, "
                f"got {self.counted_flops_yat_combined}"
            )
        return self


class BenchReport(BaseModel):
    convention: str = COUNTING_CONVENTION
    environment: str
    reps: int
    threads: Optional[int] = Field(
        DEFAULT_THREADS, description="BLAS thread limit while timing; None if unpinned"
    )
    batch: int
    neurons: int
    rows: List[BenchRow]


def environment_note() -> str:
    return (
        f"{platform.platform()}; {platform.machine()}; "
        f"python {platform.python_version()}; numpy {np.__version__}"
    )


def counted_flops(
    d: int, state: RngState = RngState(0)
) -> Tuple[int, int, int, RngState]:
    """
    Count FLOPs of one dot neuron and one E-neuron at dimension d.

    Returns:
        Tuple of (dot-neuron count, E-neuron reduction count, E-neuron count
        including the square-and-divide, advanced state)
    """
    values, state = rng_normal_matrix(state, 2, d)
    dot = dot_neuron_flops(values[0], values[1])
    yat = yat_neuron_flops(values[0], values[1])
    return int(dot["flops"]), int(yat["reduction_flops"]), int(yat["flops"]), state


def _median_seconds(kernel: Callable[[], object], reps: int) -> float:
    kernel()
    timings = []
    for _ in range(reps):
        start = time.perf_counter()
        kernel()
        timings.append(time.perf_counter() - start)
    return max(statistics.median(timings), 1e-12)


def bench_kernels(
    dims: Sequence[int] = DEFAULT_DIMS,
    reps: int = DEFAULT_REPS,
    state: RngState = RngState(0),
    batch: int = BATCH,
    neurons: int = NEURONS,
    threads: Optional[int] = DEFAULT_THREADS,
) -> BenchReport:
    """
    Count FLOPs and time batched layers for every dimension.

    Throughput is the median of reps timed runs after one warm-up run, with
    the BLAS thread pools limited to threads (unlimited when None).

    Args:
        dims: Input dimensions (non-empty, each >= 1)
        reps: Timed repetitions (>= 1)
        state: RNG state for the random operands
        batch: Rows per timed batch
        neurons: Neurons per timed layer
        threads: BLAS thread limit while timing

    Returns:
        BenchReport

    Raises:
        DomainError: Empty dims, a dimension below 1, reps < 1 or threads < 1
    """
    if not dims or any(d < 1 for d in dims):
        raise DomainError(
            f"dims must be a non-empty list of positive sizes, got {list(dims)}"
        )
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}")
    if threads is not None and threads < 1:
        raise DomainError(f"threads must be at least 1, got {threads}")
    rows: List[BenchRow] = []
    for d in dims:
        dot_count, yat_count, yat_combined, state = counted_flops(d, state)
        x, state = rng_normal_matrix(state, batch, d)
        w, state = rng_normal_matrix(state, neurons, d)
        dense = DenseParams(w, np.zeros(neurons), Activation.RELU)
        yat = YatDenseParams(w, alpha=0.0)
        with threadpool_limits(limits=threads):
            dot_seconds = _median_seconds(lambda: dense_forward(x, dense), reps)
            yat_seconds = _median_seconds(lambda: yat_dense_forward(x, yat), reps)
        evaluations = batch * neurons
        row = BenchRow(
            d=d,
            counted_flops_dot_neuron=dot_count,
            counted_flops_yat_neuron=yat_count,
            counted_flops_yat_combined=yat_combined,
            model_flops=flop_model(d),
            throughput_dot=evaluations / dot_seconds,
            throughput_yat=evaluations / yat_seconds,
            measured_ratio=yat_seconds / dot_seconds,
        )
        rows.append(row)
        logger.info(
            f"d={d}: counted {dot_count}/{yat_count} FLOPs, "
            f"measured ratio {row.measured_ratio:.3f}"
        )
    return BenchReport(
        environment=environment_note(),
        reps=reps,
        threads=threads,
        batch=batch,
        neurons=neurons,
        rows=rows,
    )
