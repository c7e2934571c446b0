"""Verification instruments: energy drift, reference error, conserved momentum, order fits."""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from levitron.core import HamiltonianSystem, PhaseState
from levitron.errors import ContractViolation, EvaluationFailure
from levitron.integrators import IntegratorSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trajectory:
    """Sampled states; ``times[i]`` belongs to row i of ``q`` and ``p``."""

    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    spec: Optional[IntegratorSpec] = None
    stride: int = 1

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape or q.shape[0] != times.size:
            raise ContractViolation(
                f"inconsistent trajectory shapes: times {times.shape}, "
                f"q {q.shape}, p {p.shape}"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ContractViolation("sample times must be strictly increasing")
        if not (np.isfinite(q).all() and np.isfinite(p).all()):
            raise EvaluationFailure("trajectory holds non-finite samples")
        for arr in (times, q, p):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.q[i], self.p[i], self.times[i])

    def states(self) -> Iterator[PhaseState]:
        for i in range(len(self)):
            yield self.state(i)

    @classmethod
    def from_states(cls, states: Sequence[PhaseState], spec=None, stride=1):
        return cls(
            times=[s.t for s in states],
            q=[s.q for s in states],
            p=[s.p for s in states],
            spec=spec,
            stride=stride,
        )


class ErrorReport(BaseModel):
    """Trajectory quality summary; the error fields stay empty without a reference."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    mean_error: Optional[float] = Field(None, ge=0)
    max_error: Optional[float] = Field(None, ge=0)
    energy_drift_max: float = Field(0.0, ge=0)
    p6_drift_max: float = Field(0.0, ge=0)
    estimated_order: Optional[float] = None

    @model_validator(mode="after")
    def _mean_below_max(self):
        if (self.mean_error is None) != (self.max_error is None):
            raise ValueError("mean_error and max_error are reported together")
        if self.mean_error is not None and self.mean_error > self.max_error:
            raise ValueError("mean_error exceeds max_error")
        return self


def energy_drift(traj: Trajectory, system: HamiltonianSystem) -> np.ndarray:
    """|H(t_i) - H(t_0)| at every sample."""
    energies = np.array([system.energy(s) for s in traj.states()])
    return np.abs(energies - energies[0])


def _check_same_sampling(traj: Trajectory, ref: Trajectory):
    if len(traj) != len(ref):
        raise ContractViolation(
            f"sample counts differ: {len(traj)} vs {len(ref)}"
        )
    if traj.q.shape[1] != ref.q.shape[1]:
        raise ContractViolation("trajectories have different dimensions")
    spacing = np.diff(ref.times).min() if len(ref) > 1 else 1.0
    if not np.allclose(traj.times, ref.times, rtol=0.0, atol=1e-9 * spacing):
        raise ContractViolation("trajectories are sampled at different times")


def trajectory_error(
    traj: Trajectory, ref: Trajectory, positions_only: bool = False
) -> Tuple[float, float]:
    """Mean and maximum Euclidean distance to the reference over the samples."""
    _check_same_sampling(traj, ref)
    diff = traj.q - ref.q
    if not positions_only:
        diff = np.hstack((diff, traj.p - ref.p))
    norms = np.linalg.norm(diff, axis=1)
    worst = float(norms.max())
    return min(float(norms.mean()), worst), worst


def p6_drift(traj: Trajectory, index: int = 5) -> float:
    """max |p_index(t_i) - p_index(t_0)|; index 5 is the Levitron spin momentum."""
    column = traj.p[:, index]
    return float(np.max(np.abs(column - column[0])))


def convergence_order(errors: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log(err) against log(h)."""
    if len(errors) < 2:
        raise ContractViolation("need at least two (h, error) pairs")
    hs = np.array([h for h, _ in errors], dtype=float)
    errs = np.array([e for _, e in errors], dtype=float)
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise ContractViolation(f"errors must be positive and finite, got {errs.tolist()}")
    if np.any(hs <= 0) or not np.all(np.diff(hs) < 0):
        raise ContractViolation("step sizes must be positive and strictly decreasing")
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)


def error_report(
    traj: Trajectory,
    system: HamiltonianSystem,
    ref: Optional[Trajectory] = None,
    positions_only: bool = False,
    estimated_order: Optional[float] = None,
) -> ErrorReport:
    mean = worst = None
    if ref is not None:
        mean, worst = trajectory_error(traj, ref, positions_only)
    cyclic = getattr(system, "cyclic_momentum", None)
    return ErrorReport(
        mean_error=mean,
        max_error=worst,
        energy_drift_max=float(energy_drift(traj, system).max()),
        p6_drift_max=p6_drift(traj, cyclic) if cyclic is not None else 0.0,
        estimated_order=estimated_order,
    )
