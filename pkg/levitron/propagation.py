"""Trajectory driver: repeated macro steps with sampling."""

import functools
import logging
from typing import Callable, Optional

from levitron.config import DEFAULT_STRIDE
from levitron.core import HamiltonianSystem, PhaseState
from levitron.diagnostics import Trajectory
from levitron.errors import ContractViolation, IntegrationFailure
from levitron.integrators import (
    IntegratorSpec,
    Scheme,
    pv_step,
    rk4_step,
    td_strang_step,
    vv_step,
)
from levitron.mpe import mpe_step

logger = logging.getLogger(__name__)

_STEPPERS = {
    Scheme.VV: vv_step,
    Scheme.PV: pv_step,
    Scheme.RK4: rk4_step,
    Scheme.TD_STRANG: td_strang_step,
}


def make_stepper(spec: IntegratorSpec, executor=None) -> Callable:
    """(system, state, h) -> state for the scheme ``spec`` selects."""
    if spec.scheme is Scheme.MPE:
        return functools.partial(mpe_step, n=spec.mpe_n, kernel=spec.kernel, executor=executor)
    return _STEPPERS[spec.scheme]


def integrate(
    system: HamiltonianSystem,
    state: PhaseState,
    spec: IntegratorSpec,
    stride: int = DEFAULT_STRIDE,
    stop_when: Optional[Callable[[PhaseState], bool]] = None,
    executor=None,
) -> Trajectory:
    """Advance ``spec.steps`` steps, keeping step 0 and every ``stride``-th state.

    Time is t0 + i*h from the step index. ``stop_when`` is tried on each
    sample and ends the run early when it returns True.
    """
    if stride < 1:
        raise ContractViolation(f"stride must be >= 1, got {stride}")
    stepper = make_stepper(spec, executor)
    t0, h = state.t, spec.h
    samples = [state]
    current = state
    for i in range(spec.steps):
        try:
            current = stepper(system, current, h)
        except IntegrationFailure as exc:
            exc.step = i
            exc.state = current
            logger.error("integration failed at step %s: %s", i, exc)
            raise
        current = current.at(t0 + (i + 1) * h)
        if (i + 1) % stride == 0:
            samples.append(current)
            if stop_when is not None and stop_when(current):
                logger.info("stopped at step %s (t=%s)", i + 1, current.t)
                break
    return Trajectory.from_states(samples, spec=spec, stride=stride)
