"""Experiment drivers behind the CLI: simulate, convergence tables, spin sweeps."""

import asyncio
import contextlib
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from levitron.config import MAX_PARALLEL_CALLS
from levitron.core import HamiltonianSystem
from levitron.diagnostics import (
    ErrorReport,
    Trajectory,
    convergence_order,
    error_report,
    trajectory_error,
)
from levitron.errors import (
    ConfigurationError,
    ContractViolation,
    EvaluationFailure,
    IntegrationFailure,
)
from levitron.integrators import IntegratorSpec, Scheme
from levitron.propagation import integrate
from levitron.settings import RunConfig

logger = logging.getLogger(__name__)


def trajectory_header(dimension: int) -> List[str]:
    return (
        ["t"]
        + [f"q{i}" for i in range(1, dimension + 1)]
        + [f"p{i}" for i in range(1, dimension + 1)]
        + ["energy"]
    )


def write_trajectory_csv(traj: Trajectory, system: HamiltonianSystem, path: str):
    """One row per sample, 17 significant digits so values round-trip."""
    with open(path, "w", encoding="utf-8", newline="") as writer:
        out = csv.writer(writer, lineterminator="\n")
        out.writerow(trajectory_header(traj.q.shape[1]))
        for state in traj.states():
            row = [state.t, *state.q, *state.p, system.energy(state)]
            out.writerow([f"{float(x):.17g}" for x in row])


def write_report(report: BaseModel, path: str):
    with open(path, "w", encoding="utf-8") as writer:
        writer.write(report.model_dump_json(indent=2))
        writer.write("\n")


def substep_pool(spec: IntegratorSpec):
    """Thread pool for the independent MPE substep runs; a null context otherwise."""
    if spec.scheme is Scheme.MPE and spec.mpe_n > 1 and MAX_PARALLEL_CALLS > 1:
        return ThreadPoolExecutor(max_workers=min(MAX_PARALLEL_CALLS, spec.mpe_n))
    return contextlib.nullcontext()


def warn_if_untimed(system: HamiltonianSystem, spec: IntegratorSpec) -> bool:
    """Warn when a time-dependent system gets a kernel without the time shifts."""
    untimed = spec.scheme in (Scheme.VV, Scheme.PV) or (
        spec.scheme is Scheme.MPE and spec.kernel != "td"
    )
    if system.time_dependent and untimed:
        logger.warning(
            "%s evaluates a time-dependent system at the step start and drops to first "
            "order; use td_strang or kernel td",
            spec.label,
        )
        return True
    return False


def check_evaluable(traj: Trajectory, system: HamiltonianSystem):
    """Raise IntegrationFailure at the first sample whose energy cannot be evaluated.

    A step may end on a state it never evaluated itself (the last drift of
    PV, the RK4 combination).
    """
    previous = None
    for i, state in enumerate(traj.states()):
        try:
            system.energy(state)
        except EvaluationFailure as exc:
            raise IntegrationFailure(
                f"sampled state at t={state.t} cannot be evaluated: {exc}",
                step=max(i * traj.stride - 1, 0),
                state=previous,
            ) from exc
        previous = state


def run_simulate(
    config: RunConfig, out_path: Optional[str] = None, report_path: Optional[str] = None
) -> Tuple[Trajectory, ErrorReport]:
    """Integrate the configured run, write the CSV trajectory and the drift report."""
    system = config.build_system()
    state = config.initial_state()
    spec = config.integrator
    logger.info("simulate %s h=%s steps=%s on %s", spec.label, spec.h, spec.steps, system)
    warn_if_untimed(system, spec)
    start_time = time.time()
    with substep_pool(spec) as executor:
        traj = integrate(system, state, spec, stride=config.output.stride, executor=executor)
    logger.info("Completed %s steps in %s seconds.", spec.steps, time.time() - start_time)

    check_evaluable(traj, system)
    report = error_report(traj, system)
    write_trajectory_csv(traj, system, out_path or config.output.trajectory)
    write_report(report, report_path or config.output.report)
    return traj, report


class ConvergenceRow(BaseModel):
    scheme: str
    h: float
    steps: int
    mean_error: float
    max_error: float


class ConvergenceReport(BaseModel):
    horizon: float
    reference_h: float
    rows: List[ConvergenceRow] = []
    orders: Dict[str, Optional[float]] = {}

    def mean_errors(self, scheme: str) -> List[float]:
        return [row.mean_error for row in self.rows if row.scheme == scheme]


def _whole_multiple(total: float, h: float, what: str) -> int:
    count = round(total / h)
    if count < 1 or abs(count * h - total) > 1e-9 * total:
        raise ConfigurationError([f"convergence.h: {h!r} does not divide the {what} {total!r}"])
    return count


def run_convergence(
    config: RunConfig, schemes: Sequence[str], h_list: Sequence[float]
) -> ConvergenceReport:
    """Mean/max error against one fine RK4 reference for every (scheme, h).

    The horizon is integrator.h * integrator.steps. Errors are compared at
    common sample times spaced stride * max(h_list).
    """
    if not h_list:
        raise ConfigurationError(["convergence.h: empty step list"])
    if not schemes:
        raise ConfigurationError(["convergence.schemes: empty scheme list"])
    if any(not h > 0 for h in h_list):
        raise ConfigurationError([f"convergence.h: step sizes must be positive, got {list(h_list)}"])
    try:
        specs = {label: IntegratorSpec.from_label(label, 1.0, 1, config.integrator.kernel) for label in schemes}
    except (ContractViolation, ValueError) as exc:
        raise ConfigurationError([f"convergence.schemes: {exc}"]) from exc

    hs = sorted(set(h_list), reverse=True)
    horizon = config.integrator.h * config.integrator.steps
    coarse_steps = _whole_multiple(horizon, hs[0], "horizon")
    sample_dt = min(config.output.stride, coarse_steps) * hs[0]
    positions_only = config.output.error_norm == "position"

    system = config.build_system()
    state = config.initial_state()

    h_ref = hs[-1] / config.output.reference_refinement
    ref_spec = IntegratorSpec(
        scheme=Scheme.RK4, h=h_ref, steps=_whole_multiple(horizon, h_ref, "horizon")
    )
    logger.info("reference RK4 h=%s steps=%s horizon=%s", h_ref, ref_spec.steps, horizon)
    start_time = time.time()
    ref = integrate(system, state, ref_spec, stride=_whole_multiple(sample_dt, h_ref, "sample interval"))
    logger.info("Completed reference in %s seconds.", time.time() - start_time)

    report = ConvergenceReport(horizon=horizon, reference_h=h_ref)
    for label, template in specs.items():
        warn_if_untimed(system, template)
        pairs = []
        for h in hs:
            spec = template.model_copy(update={"h": h, "steps": _whole_multiple(horizon, h, "horizon")})
            start_time = time.time()
            with substep_pool(spec) as executor:
                traj = integrate(
                    system,
                    state,
                    spec,
                    stride=_whole_multiple(sample_dt, h, "sample interval"),
                    executor=executor,
                )
            mean, worst = trajectory_error(traj, ref, positions_only)
            logger.info(
                "%s h=%s mean=%.4e max=%.4e (%.2f s)", label, h, mean, worst, time.time() - start_time
            )
            report.rows.append(
                ConvergenceRow(scheme=label, h=h, steps=spec.steps, mean_error=mean, max_error=worst)
            )
            pairs.append((h, mean))
        order = None
        if len(pairs) >= 2:
            if all(err > 0 for _, err in pairs):
                order = convergence_order(pairs)
                if order < template.nominal_order - 0.5:
                    logger.warning(
                        "%s measured order %.2f below nominal %s", label, order, template.nominal_order
                    )
            else:
                logger.warning("%s reached zero error; order not estimated", label)
        report.orders[label] = order
    return report


class SweepRecord(BaseModel):
    spin: float
    escaped: bool
    singular: bool = False
    time: float = Field(ge=0)


class SweepReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    horizon: float
    escape_radius: float
    records: List[SweepRecord] = []
    stable_interval: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _times_within_horizon(self):
        for record in self.records:
            if record.time > self.horizon:
                raise ValueError(f"escape time {record.time} beyond horizon {self.horizon}")
        return self


def _stable_interval(records: List[SweepRecord]) -> Optional[Tuple[float, float]]:
    stable = [i for i, record in enumerate(records) if not record.escaped]
    if not stable or stable[-1] - stable[0] + 1 != len(stable):
        return None
    return records[stable[0]].spin, records[stable[-1]].spin


def _sweep_point(config: RunConfig, spin: float) -> SweepRecord:
    sweep = config.sweep
    system = config.build_system()
    state = config.initial_state(spin=spin)
    q0 = state.q
    radius = sweep.escape_radius
    h = config.integrator.h
    spec = config.integrator.model_copy(update={"steps": max(1, math.ceil(sweep.horizon / h - 1e-9))})

    def escaped(current):
        q = current.q
        return abs(q[0]) > radius or abs(q[1]) > radius or abs(q[2] - q0[2]) > radius

    try:
        traj = integrate(system, state, spec, stride=config.output.stride, stop_when=escaped)
    except IntegrationFailure as exc:
        logger.info("spin %s: singular state at step %s", spin, exc.step)
        return SweepRecord(spin=spin, escaped=True, singular=True, time=min(exc.step * h, sweep.horizon))
    last = traj.state(len(traj) - 1)
    if escaped(last):
        return SweepRecord(spin=spin, escaped=True, time=min(last.t - state.t, sweep.horizon))
    return SweepRecord(spin=spin, escaped=False, time=sweep.horizon)


async def _sweep_all(config: RunConfig, spins: Sequence[float]) -> List[SweepRecord]:
    semaphore = asyncio.Semaphore(MAX_PARALLEL_CALLS)

    async def run_one(spin):
        async with semaphore:
            return await asyncio.to_thread(_sweep_point, config, spin)

    return await asyncio.gather(*(run_one(spin) for spin in spins))


def run_sweep(config: RunConfig, spins: Optional[Sequence[float]] = None) -> SweepReport:
    """Integrate one trajectory per initial p6 and record whether it escapes."""
    if config.sweep is None:
        raise ConfigurationError(["sweep: section missing"])
    if config.system.kind != "levitron":
        raise ConfigurationError(["system.kind: sweeps need the levitron system"])
    values = sorted(config.sweep.values() if spins is None else spins)
    logger.info("sweep over %s spins, horizon %s", len(values), config.sweep.horizon)
    start_time = time.time()
    records = asyncio.run(_sweep_all(config, values)) if values else []
    logger.info("Completed sweep in %s seconds.", time.time() - start_time)
    return SweepReport(
        horizon=config.sweep.horizon,
        escape_radius=config.sweep.escape_radius,
        records=list(records),
        stable_interval=_stable_interval(list(records)),
    )
