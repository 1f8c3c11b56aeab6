#!/usr/bin/env python
"""
Deterministic, explicitly threaded random number generation.

An RngState is a (seed, counter) pair. Each draw builds a PCG64 generator
from SeedSequence(seed, spawn_key=(counter,)) and hands back the state with
the counter advanced by one, so identical states give identical draws on
every platform numpy supports.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from neural_matter_kit.errors import DomainError

_UINT64_MASK = (1 << 64) - 1


class DrawKind(str, Enum):
    """Distributions supported by rng_draw."""
    UNIFORM01 = "uniform01"
    STANDARD_NORMAL = "standard_normal"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class RngState:
    """Immutable generator state: a 64-bit seed and a 64-bit stream counter."""
    seed: int
    counter: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _UINT64_MASK:
            raise DomainError(
                f"seed must be an unsigned 64-bit integer, got {self.seed}"
            )
        if not 0 <= self.counter <= _UINT64_MASK:
            raise DomainError(
                f"counter must be an unsigned 64-bit integer, got {self.counter}"
            )

    def advance(self) -> "RngState":
        return RngState(self.seed, (self.counter + 1) & _UINT64_MASK)


def generator(state: RngState) -> Tuple[np.random.Generator, RngState]:
    """
    Build the numpy generator for the current state.

    Args:
        state: Current state

    Returns:
        Tuple of (generator, advanced state)
    """
    sequence = np.random.SeedSequence(entropy=state.seed, spawn_key=(state.counter,))
    return np.random.Generator(np.random.PCG64(sequence)), state.advance()


def rng_draw(
    state: RngState,
    kind: DrawKind,
    n: int,
    p: Optional[float] = None,
) -> Tuple[NDArray[np.float64], RngState]:
    """
    Draw n values of the requested distribution.

    Args:
        state: Current state
        kind: uniform01, standard_normal or bernoulli
        n: Number of values
        p: Success probability, required for bernoulli

    Returns:
        Tuple of (float64 values, advanced state); bernoulli values are 0.0 / 1.0

    Raises:
        DomainError: If p is missing or outside [0, 1] for bernoulli, or n < 0
    """
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    kind = DrawKind(kind)
    if kind is DrawKind.BERNOULLI:
        if p is None or not 0.0 <= p <= 1.0:
            raise DomainError(f"bernoulli probability must lie in [0, 1], got {p}")

    gen, next_state = generator(state)
    if kind is DrawKind.UNIFORM01:
        values = gen.random(n)
    elif kind is DrawKind.STANDARD_NORMAL:
        values = gen.standard_normal(n)
    else:
        # uniform draws lie in [0, 1), so p=0 gives no successes and p=1 gives all
        values = (gen.random(n) < p).astype(np.float64)
    return values, next_state


def rng_normal_matrix(
    state: RngState, rows: int, cols: int, scale: float = 1.0
) -> Tuple[NDArray[np.float64], RngState]:
    """Draw a rows×cols matrix of N(0, scale²) entries."""
    values, state = rng_draw(state, DrawKind.STANDARD_NORMAL, rows * cols)
    return (values * scale).reshape(rows, cols), state


def rng_permutation(state: RngState, n: int) -> Tuple[NDArray[np.int64], RngState]:
    """Draw a uniformly random permutation of range(n)."""
    gen, next_state = generator(state)
    return gen.permutation(n).astype(np.int64), next_state
