"""One-step maps: Stormer-Verlet splittings, classical RK4 and their compositions.

The splitting kernels apply the kick/drift shifts of the system contract
in sequence, each evaluated at the point the previous shift produced.
Sub-maps are numbered from 1 in application order; a failure inside one is
raised as IntegrationFailure carrying that number.
"""

import logging
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from levitron.core import HamiltonianSystem, PhaseState
from levitron.errors import ContractViolation, EvaluationFailure, IntegrationFailure

logger = logging.getLogger(__name__)

Kernel = Literal["vv", "pv", "td"]


class Scheme(str, Enum):
    VV = "vv"
    PV = "pv"
    RK4 = "rk4"
    TD_STRANG = "td_strang"
    MPE = "mpe"


# nominal global order, used to flag degraded convergence
NOMINAL_ORDER = {Scheme.VV: 2, Scheme.PV: 2, Scheme.RK4: 4, Scheme.TD_STRANG: 2}


class IntegratorSpec(BaseModel):
    """Scheme selector with step size and step count."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    scheme: Scheme = Scheme.VV
    mpe_n: int = Field(2, ge=1, le=5)
    kernel: Kernel = "vv"
    h: float = Field(1e-3, gt=0)
    steps: int = Field(1000, ge=1)

    @property
    def label(self) -> str:
        if self.scheme is Scheme.MPE:
            return f"mpe{2 * self.mpe_n}"
        return self.scheme.value

    @property
    def nominal_order(self) -> int:
        if self.scheme is Scheme.MPE:
            return 2 * self.mpe_n
        return NOMINAL_ORDER[self.scheme]

    @classmethod
    def from_label(cls, label: str, h: float, steps: int, kernel: Kernel = "vv"):
        """Build from CLI labels: vv, pv, rk4, td, td_strang, mpe4 ... mpe10."""
        name = label.strip().lower()
        if name == "td":
            name = Scheme.TD_STRANG.value
        if name.startswith("mpe"):
            order = name[3:]
            if not order.isdigit() or int(order) % 2:
                raise ContractViolation(f"MPE label needs an even order, got {label!r}")
            return cls(scheme=Scheme.MPE, mpe_n=int(order) // 2, kernel=kernel, h=h, steps=steps)
        try:
            scheme = Scheme(name)
        except ValueError as exc:
            raise ContractViolation(f"unknown scheme {label!r}") from exc
        return cls(scheme=scheme, kernel=kernel, h=h, steps=steps)


def _guarded(substep, shift, state, h, t):
    try:
        return shift(state, h, t)
    except EvaluationFailure as exc:
        raise IntegrationFailure(str(exc), substep=substep, state=state) from exc


def _kick_drift_kick(system, state, h, times):
    t_start = state.t
    current = _guarded(1, system.kick, state, 0.5 * h, times[0])
    current = _guarded(2, system.drift, current, h, times[1])
    current = _guarded(3, system.kick, current, 0.5 * h, times[2])
    return current.at(t_start + h)


def vv_step(system: HamiltonianSystem, state: PhaseState, h: float) -> PhaseState:
    """Velocity Verlet: kick(h/2), drift(h), kick(h/2)."""
    return _kick_drift_kick(system, state, h, (None, None, None))


def pv_step(system: HamiltonianSystem, state: PhaseState, h: float) -> PhaseState:
    """Position Verlet: drift(h/2), kick(h), drift(h/2)."""
    t_start = state.t
    current = _guarded(1, system.drift, state, 0.5 * h, None)
    current = _guarded(2, system.kick, current, h, None)
    current = _guarded(3, system.drift, current, 0.5 * h, None)
    return current.at(t_start + h)


def td_strang_step(
    system: HamiltonianSystem, state: PhaseState, h: float, t: Optional[float] = None
) -> PhaseState:
    """Kick-drift-kick with the forward-time shifts folded into evaluation times.

    Right to left: kick(h/2) at t + h/4, drift(h) at t + h/2, kick(h/2) at
    t + 3h/4. Autonomous systems ignore the times, so this is vv_step on them.
    """
    t0 = state.t if t is None else t
    times = (t0 + 0.25 * h, t0 + 0.5 * h, t0 + 0.75 * h)
    return _kick_drift_kick(system, state.at(t0), h, times)


def rk4_step(system: HamiltonianSystem, state: PhaseState, h: float) -> PhaseState:
    """Classical four-stage Runge-Kutta on (dq, dp) = (dH/dp, -dH/dq)."""
    t0 = state.t
    d = state.dimension
    y = state.vector()

    def field(substep, vector, t):
        try:
            dq, dp = system.vector_field(PhaseState.from_vector(vector, t), t)
        except EvaluationFailure as exc:
            raise IntegrationFailure(str(exc), substep=substep, state=state) from exc
        out = y.copy()
        out[:d] = dq
        out[d:] = dp
        return out

    k1 = field(1, y, t0)
    k2 = field(2, y + 0.5 * h * k1, t0 + 0.5 * h)
    k3 = field(3, y + 0.5 * h * k2, t0 + 0.5 * h)
    k4 = field(4, y + h * k3, t0 + h)
    try:
        return PhaseState.from_vector(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t0 + h)
    except EvaluationFailure as exc:
        raise IntegrationFailure(str(exc), substep=5, state=state) from exc


KERNELS = {"vv": vv_step, "pv": pv_step, "td": td_strang_step}


def t2_substeps(
    system: HamiltonianSystem,
    state: PhaseState,
    h: float,
    k: int,
    kernel: Kernel = "vv",
) -> PhaseState:
    """k applications of the second-order kernel at step h/k."""
    if k < 1:
        raise ContractViolation(f"substep count must be >= 1, got {k}")
    try:
        step = KERNELS[kernel]
    except KeyError as exc:
        raise ContractViolation(f"unknown kernel {kernel!r}") from exc
    sub = h / k
    t0 = state.t
    current = state
    for j in range(k):
        current = step(system, current.at(t0 + j * sub), sub)
    return current.at(t0 + h)
