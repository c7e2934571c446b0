"""Phase-space state, the Hamiltonian-system contract and the helpers built on it.

A system bundles the energy with both partial-derivative fields. The split
maps (``kick`` along -dH/dq, ``drift`` along dH/dp) are the first-order
truncated shift operators I -/+ h*field evaluated at the current point, so
for separable Hamiltonians they are exact sub-flows.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from levitron.config import FD_EPS
from levitron.errors import ContractViolation, EvaluationFailure

logger = logging.getLogger(__name__)

Block = Literal["q", "p"]


@dataclass(frozen=True, slots=True)
class PhaseState:
    """Point (q, p) in 2d-dimensional phase space at time t.

    Arrays are copied and frozen on construction; non-finite entries are
    rejected so no operation can hand back a silently broken state.
    """

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.size < 1 or q.shape != p.shape:
            raise ContractViolation(
                f"q and p must have equal length d >= 1, got {q.size} and {p.size}"
            )
        for name, block in (("q", q), ("p", p)):
            bad = np.flatnonzero(~np.isfinite(block))
            if bad.size:
                raise EvaluationFailure(
                    f"non-finite {name}{bad[0] + 1} in phase state",
                    component=f"{name}{bad[0] + 1}",
                )
        if not math.isfinite(self.t):
            raise EvaluationFailure("non-finite time in phase state", component="t")
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dimension(self) -> int:
        return self.q.size

    def at(self, t: float) -> "PhaseState":
        """Same point, relabelled time."""
        return PhaseState(self.q, self.p, t)

    def vector(self) -> np.ndarray:
        """Concatenated (q, p) as a fresh writable array."""
        return np.concatenate((self.q, self.p))

    @classmethod
    def from_vector(cls, vector, t: float = 0.0) -> "PhaseState":
        d = len(vector) // 2
        return cls(vector[:d], vector[d:], t)


class HamiltonianSystem(ABC):
    """Contract for an autonomous Hamiltonian H(q, p).

    Every method takes an optional evaluation time ``t``; autonomous systems
    ignore it, which is what makes the time-shifted schemes reduce to the
    plain ones on them.
    """

    dimension: int = 1
    time_dependent: bool = False
    # momentum index conjugate to a cyclic coordinate, if any
    cyclic_momentum = None

    @abstractmethod
    def energy(self, state: PhaseState, t: Optional[float] = None) -> float:
        ...

    @abstractmethod
    def dh_dp(self, state: PhaseState, t: Optional[float] = None) -> np.ndarray:
        """Direction of operator A (drift)."""

    @abstractmethod
    def dh_dq(self, state: PhaseState, t: Optional[float] = None) -> np.ndarray:
        """Negated direction of operator B (kick)."""

    def vector_field(self, state: PhaseState, t: Optional[float] = None):
        """(dq/dt, dp/dt) = (dH/dp, -dH/dq), the generator A + B."""
        return self.dh_dp(state, t), -self.dh_dq(state, t)

    def kick(self, state: PhaseState, h: float, t: Optional[float] = None):
        """p <- p - h * dH/dq(q, p)."""
        return PhaseState(state.q, state.p - h * self.dh_dq(state, t), state.t)

    def drift(self, state: PhaseState, h: float, t: Optional[float] = None):
        """q <- q + h * dH/dp(q, p)."""
        return PhaseState(state.q + h * self.dh_dp(state, t), state.p, state.t)


class TimeDependentSystem(HamiltonianSystem):
    """H(q, p, t). When ``t`` is omitted the state's own time is used."""

    time_dependent = True

    @staticmethod
    def evaluation_time(state: PhaseState, t: Optional[float]) -> float:
        return state.t if t is None else t


def fd_gradient(
    system: HamiltonianSystem,
    state: PhaseState,
    which: Block,
    eps: float = FD_EPS,
) -> np.ndarray:
    """Central-difference dH/dq or dH/dp at ``state``.

    The probe step of component i is eps * max(1, |x_i|), so coordinates of
    very different magnitude are differentiated with uniform relative
    accuracy.
    """
    if eps <= 0:
        raise ContractViolation(f"eps must be positive, got {eps}")
    if which not in ("q", "p"):
        raise ContractViolation(f"which must be 'q' or 'p', got {which!r}")

    base = state.q if which == "q" else state.p
    grad = np.empty(base.size)
    for i, x in enumerate(base):
        step = eps * max(1.0, abs(x))
        plus, minus = base.copy(), base.copy()
        plus[i] = x + step
        minus[i] = x - step
        if which == "q":
            e_plus = system.energy(PhaseState(plus, state.p, state.t))
            e_minus = system.energy(PhaseState(minus, state.p, state.t))
        else:
            e_plus = system.energy(PhaseState(state.q, plus, state.t))
            e_minus = system.energy(PhaseState(state.q, minus, state.t))
        if not (math.isfinite(e_plus) and math.isfinite(e_minus)):
            raise EvaluationFailure(
                f"non-finite energy probing {which}{i + 1}",
                component=f"{which}{i + 1}",
            )
        # the representable step, not the requested one
        grad[i] = (e_plus - e_minus) / (plus[i] - minus[i])
    return grad


def affine_combine(
    states: Sequence[PhaseState], weights: Sequence[float]
) -> PhaseState:
    """Sum_i w_i * x_i for weights summing to one.

    Computed as x_0 + sum_i w_i (x_i - x_0) with Neumaier-compensated
    accumulation in index order: MPE weights alternate in sign and grow
    large, and constant inputs come back unchanged.
    """
    if not states or len(states) != len(weights):
        raise ContractViolation(
            f"need matching non-empty lists, got {len(states)} states "
            f"and {len(weights)} weights"
        )
    if abs(math.fsum(weights) - 1.0) > 1e-12:
        raise ContractViolation(
            f"affine weights must sum to 1, got {math.fsum(weights)!r}"
        )
    first = states[0]
    for s in states[1:]:
        if s.dimension != first.dimension:
            raise ContractViolation(
                f"dimension mismatch: {s.dimension} vs {first.dimension}"
            )
        if not math.isclose(s.t, first.t, rel_tol=1e-12, abs_tol=1e-12):
            raise ContractViolation(f"time mismatch: {s.t!r} vs {first.t!r}")

    origin = first.vector()
    total = np.zeros_like(origin)
    compensation = np.zeros_like(origin)
    for w, s in zip(weights, states):
        term = w * (s.vector() - origin)
        running = total + term
        compensation += np.where(
            np.abs(total) >= np.abs(term),
            (total - running) + term,
            (term - running) + total,
        )
        total = running
    return PhaseState.from_vector(origin + (total + compensation), first.t)
