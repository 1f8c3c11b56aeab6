#!/usr/bin/env python
"""
Instrumented scalar arithmetic for FLOP counting.

Counting convention: one FLOP per scalar add, sub, mul, div and per ReLU
comparison. The E-neuron's squared-distance reduction is seeded with ε, so
the stabiliser adds nothing. Every operation is tallied, and the E-neuron
reports its tally twice: once as soon as the two reductions finish, and once
after the square-and-divide combine (2 more FLOPs). The bias and Θ of the
E-neuron are not evaluated here.

    dot neuron            = d mul + (d − 1) add + 1 bias add + 1 ReLU = 2d + 1
    E-neuron reductions   = (2d − 1) dot product + d (sub, mul, add)  = 5d − 1
    E-neuron with combine = reductions + 1 mul + 1 div                = 5d + 1

The modelled E-neuron cost compares against the reduction tally.
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence, Union

Number = Union[int, float]

COUNTING_CONVENTION = (
    "one FLOP per scalar add/sub/mul/div and per ReLU; "
    "dot neuron = dot product + bias + ReLU; "
    "E-neuron = dot product + epsilon-seeded squared-distance reduction (modelled), "
    "plus 1 mul + 1 div for the square-and-divide combine (counted separately); "
    "E-neuron bias and layer scale not evaluated"
)


@dataclass
class FlopCounter:
    counts: Dict[str, int] = field(
        default_factory=lambda: {"add": 0, "sub": 0, "mul": 0, "div": 0, "relu": 0}
    )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def tally(self, op: str) -> None:
        self.counts[op] += 1

    def value(self, x: Number) -> "CountedFloat":
        return CountedFloat(float(x), self)


class CountedFloat:
    """A float that records every arithmetic operation in its counter."""

    __slots__ = ("value", "counter")

    def __init__(self, value: float, counter: FlopCounter) -> None:
        self.value = value
        self.counter = counter

    @staticmethod
    def _raw(other: Union["CountedFloat", Number]) -> float:
        return other.value if isinstance(other, CountedFloat) else float(other)

    def _op(self, op: str, result: float) -> "CountedFloat":
        self.counter.tally(op)
        return CountedFloat(result, self.counter)

    def __add__(self, other):
        return self._op("add", self.value + self._raw(other))

    def __radd__(self, other):
        return self._op("add", self._raw(other) + self.value)

    def __sub__(self, other):
        return self._op("sub", self.value - self._raw(other))

    def __rsub__(self, other):
        return self._op("sub", self._raw(other) - self.value)

    def __mul__(self, other):
        return self._op("mul", self.value * self._raw(other))

    def __rmul__(self, other):
        return self._op("mul", self._raw(other) * self.value)

    def __truediv__(self, other):
        return self._op("div", self.value / self._raw(other))

    def __rtruediv__(self, other):
        return self._op("div", self._raw(other) / self.value)

    def relu(self) -> "CountedFloat":
        return self._op("relu", max(0.0, self.value))

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"CountedFloat({self.value!r})"


def counted_dot(w: Sequence[CountedFloat], x: Sequence[CountedFloat]) -> CountedFloat:
    """w·x as a left fold: d multiplications and d − 1 additions."""
    acc = w[0] * x[0]
    for wi, xi in zip(w[1:], x[1:]):
        acc = acc + wi * xi
    return acc


def dot_neuron_flops(
    w: Sequence[float], x: Sequence[float], bias: float = 0.0
) -> Dict[str, float]:
    """
    Evaluate relu(w·x + b) on counted scalars.

    Returns:
        {"value": output, "flops": counted operations}
    """
    counter = FlopCounter()
    ws = [counter.value(v) for v in w]
    xs = [counter.value(v) for v in x]
    out = (counted_dot(ws, xs) + bias).relu()
    return {"value": out.value, "flops": counter.total}


def yat_neuron_flops(
    w: Sequence[float], x: Sequence[float], epsilon: float = 1e-6
) -> Dict[str, float]:
    """
    Evaluate (w·x)² / (ε + ‖x − w‖²) entirely on counted scalars.

    Returns:
        {"value": output, "reduction_flops": tally after the dot product and
        the distance, "flops": tally including the square-and-divide}
    """
    counter = FlopCounter()
    ws = [counter.value(v) for v in w]
    xs = [counter.value(v) for v in x]
    dot = counted_dot(ws, xs)
    dist = counter.value(epsilon)
    for wi, xi in zip(ws, xs):
        diff = xi - wi
        dist = dist + diff * diff
    reduction = counter.total
    value = dot * dot / dist
    return {"value": value.value, "reduction_flops": reduction, "flops": counter.total}
