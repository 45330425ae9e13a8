"""Dense statevector model of the X register plus one ancilla qubit.

Basis state ``|x>_X |y>_Y`` lives at index ``2*x + y``: the ancilla is the
least significant bit, so even indices carry y=0 and odd indices y=1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_width
from .predicate import OracleTable

NORM_TOL = 1e-10
DEGENERATE_PROB = 1e-15


class SimulationError(RuntimeError):
    pass


class NormalizationError(SimulationError):
    pass


class DegenerateMeasurementError(SimulationError):
    pass


class SimulationResourceError(SimulationError, MemoryError):
    pass


@dataclass(frozen=True)
class RegisterSpec:
    width: int

    def __post_init__(self):
        check_width(self.width)

    @property
    def dimension(self) -> int:
        return 1 << (self.width + 1)


@dataclass
class StateVector:
    width: int
    amplitudes: np.ndarray

    def __post_init__(self):
        check_width(self.width)
        if self.amplitudes.shape != (1 << (self.width + 1),):
            raise ValueError(
                f"expected {1 << (self.width + 1)} amplitudes, got shape {self.amplitudes.shape}"
            )

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def check_normalized(self) -> None:
        n = self.norm_sq()
        if abs(n - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm drifted to {n!r}")

    def amplitude(self, x: int, y: int) -> complex:
        return complex(self.amplitudes[2 * x + y])

    def prob_y1(self) -> float:
        ones = self.amplitudes[1::2]
        return float(np.vdot(ones, ones).real)

    def x_marginal(self) -> np.ndarray:
        """Pr[X = x], summed over the ancilla."""
        p = np.abs(self.amplitudes) ** 2
        return p[0::2] + p[1::2]

    def copy(self) -> StateVector:
        return StateVector(self.width, self.amplitudes.copy())


@dataclass(frozen=True)
class PostOracleSummary:
    """Branch weights of the post-oracle state a|x_s>|1> + b|x_ns>|0>."""

    a_sq_exact: Fraction
    solution_count: int

    @property
    def b_sq_exact(self) -> Fraction:
        return 1 - self.a_sq_exact

    @property
    def a_sq(self) -> float:
        return float(self.a_sq_exact)

    @property
    def b_sq(self) -> float:
        return float(self.b_sq_exact)


def prepare_uniform(spec: RegisterSpec) -> StateVector:
    """Equal superposition over every x with the ancilla in |0>."""
    try:
        amps = np.zeros(spec.dimension, dtype=np.complex128)
    except MemoryError as exc:
        raise SimulationResourceError(
            f"cannot allocate a statevector of {spec.dimension} amplitudes"
        ) from exc
    amps[0::2] = 1.0 / math.sqrt(1 << spec.width)
    state = StateVector(spec.width, amps)
    state.check_normalized()
    return state


def apply_oracle(state: StateVector, table: OracleTable) -> StateVector:
    """XOR y(x) into the ancilla: swap the (x,0)/(x,1) amplitudes where y(x)=1.

    Works for any incoming ancilla state and is its own inverse.
    """
    if state.width != table.width:
        raise ValueError(f"state width {state.width} != oracle width {table.width}")
    amps = state.amplitudes.copy()
    even = 2 * table.solutions
    odd = even + 1
    amps[even], amps[odd] = state.amplitudes[odd], state.amplitudes[even]
    out = StateVector(state.width, amps)
    out.check_normalized()
    return out


def measure_y(state: StateVector, rand: float) -> tuple[int, StateVector]:
    """Projective measurement of the ancilla driven by one uniform draw.

    The outcome is 1 iff ``rand < Pr[Y=1]``; the returned state is the
    renormalised post-measurement state.
    """
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"rand must lie in [0, 1), got {rand}")
    p1 = state.prob_y1()
    outcome = 1 if rand < p1 else 0
    p = p1 if outcome else state.norm_sq() - p1
    if p < DEGENERATE_PROB:
        raise DegenerateMeasurementError(
            f"outcome {outcome} has probability {p!r}; refusing to renormalise"
        )
    amps = state.amplitudes.copy()
    amps[1 - outcome :: 2] = 0.0
    amps /= math.sqrt(p)
    collapsed = StateVector(state.width, amps)
    collapsed.check_normalized()
    return outcome, collapsed


def analytic_p1(table: OracleTable) -> PostOracleSummary:
    return PostOracleSummary(Fraction(table.solution_count, table.size), table.solution_count)


def run_shot(spec: RegisterSpec, table: OracleTable, rand: float) -> int:
    """One repetition: fresh preparation, oracle, ancilla measurement."""
    if spec.width != table.width:
        raise ValueError(f"register width {spec.width} != oracle width {table.width}")
    outcome, _ = measure_y(apply_oracle(prepare_uniform(spec), table), rand)
    return outcome
