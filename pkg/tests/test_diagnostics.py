import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levitron.core import PhaseState
from levitron.diagnostics import (
    ErrorReport,
    Trajectory,
    convergence_order,
    energy_drift,
    error_report,
    p6_drift,
    trajectory_error,
)
from levitron.errors import ContractViolation
from levitron.integrators import IntegratorSpec, Scheme
from levitron.model import default_initial_state
from levitron.propagation import integrate
from levitron.testbeds import HarmonicOscillator

START = PhaseState([1.0], [0.0])


def exact_trajectory(times):
    return Trajectory.from_states([HarmonicOscillator.exact_state(START, t) for t in times])


def test_exact_flow_has_no_energy_drift(harmonic):
    traj = exact_trajectory(np.linspace(0.0, 10.0, 101))
    assert energy_drift(traj, harmonic).max() <= 1e-14


def test_vv_energy_stays_bounded(harmonic):
    spec = IntegratorSpec(scheme=Scheme.VV, h=0.1, steps=100_000)
    traj = integrate(harmonic, START, spec, stride=10)
    assert energy_drift(traj, harmonic).max() <= 1.0 * 0.1**2


def test_rk4_energy_drifts_secularly(harmonic):
    spec = IntegratorSpec(scheme=Scheme.RK4, h=0.1, steps=100_000)
    traj = integrate(harmonic, START, spec, stride=10_000)
    drift = energy_drift(traj, harmonic)
    assert drift[-1] > drift[1]


def test_trajectory_error_identical_is_zero():
    traj = exact_trajectory([0.0, 1.0, 2.0])
    assert trajectory_error(traj, traj) == (0.0, 0.0)


def test_trajectory_error_single_offset():
    ref = Trajectory([0.0], [[0.0, 0.0]], [[0.0, 0.0]])
    traj = Trajectory([0.0], [[3.0, 0.0]], [[4.0, 0.0]])
    assert trajectory_error(traj, ref) == (5.0, 5.0)
    assert trajectory_error(traj, ref, positions_only=True) == (3.0, 3.0)


def test_trajectory_error_rejects_different_sampling():
    ref = exact_trajectory([0.0, 1.0, 2.0])
    with pytest.raises(ContractViolation):
        trajectory_error(exact_trajectory([0.0, 1.0]), ref)
    with pytest.raises(ContractViolation):
        trajectory_error(exact_trajectory([0.0, 1.0, 2.5]), ref)


def test_trajectory_error_tolerates_accumulated_time_rounding():
    ref = exact_trajectory([0.0, 1.0, 2.0])
    traj = exact_trajectory([0.0, 1.0 + 1e-13, 2.0 - 1e-13])
    mean, worst = trajectory_error(traj, ref)
    assert 0.0 <= mean <= worst


def test_trajectory_rejects_unordered_times():
    with pytest.raises(ContractViolation):
        Trajectory([0.0, 0.0], [[1.0], [1.0]], [[0.0], [0.0]])


def test_p6_drift_sees_a_perturbation():
    q = np.zeros((3, 6))
    p = np.zeros((3, 6))
    p[:, 5] = 6.0
    p[1, 5] = 6.0 + 1e-10
    assert p6_drift(Trajectory([0.0, 1.0, 2.0], q, p)) == pytest.approx(1e-10, rel=1e-3)


@pytest.mark.parametrize(
    "spec",
    [
        IntegratorSpec(scheme=Scheme.VV, h=1e-3, steps=2000),
        IntegratorSpec(scheme=Scheme.PV, h=1e-3, steps=2000),
        IntegratorSpec(scheme=Scheme.MPE, mpe_n=3, h=1e-3, steps=500),
    ],
    ids=lambda spec: spec.label,
)
def test_splittings_conserve_spin_momentum_exactly(levitron, params, spec):
    traj = integrate(levitron, default_initial_state(params), spec, stride=50)
    assert p6_drift(traj) == 0.0


def test_rk4_spin_momentum_drift_is_tiny(levitron, params):
    spec = IntegratorSpec(scheme=Scheme.RK4, h=1e-3, steps=10_000)
    traj = integrate(levitron, default_initial_state(params), spec, stride=100)
    assert p6_drift(traj) <= 1e-12


def test_convergence_order_examples():
    assert convergence_order([(0.1, 1e-2), (0.05, 2.5e-3)]) == pytest.approx(2.0)
    assert convergence_order([(0.1, 1e-4), (0.05, 6.25e-6)]) == pytest.approx(4.0)


@pytest.mark.parametrize(
    "pairs",
    [
        [(0.1, 1e-2)],
        [(0.1, 1e-2), (0.05, 0.0)],
        [(0.05, 1e-2), (0.1, 1e-3)],
        [(0.1, 1e-2), (0.1, 1e-3)],
    ],
)
def test_convergence_order_rejects_bad_input(pairs):
    with pytest.raises(ContractViolation):
        convergence_order(pairs)


@settings(max_examples=50, deadline=None)
@given(
    scale=st.floats(1e-6, 1e6),
    order=st.floats(0.5, 10.0),
)
def test_convergence_order_ignores_error_scale(scale, order):
    hs = [0.2, 0.1, 0.05]
    pairs = [(h, scale * h**order) for h in hs]
    assert convergence_order(pairs) == pytest.approx(order, abs=1e-9)


def test_error_report_fields(harmonic):
    spec = IntegratorSpec(scheme=Scheme.VV, h=0.1, steps=100)
    traj = integrate(harmonic, START, spec, stride=10)
    ref = exact_trajectory(traj.times)
    report = error_report(traj, harmonic, ref, estimated_order=2.01)
    assert 0.0 < report.mean_error <= report.max_error
    assert report.energy_drift_max > 0.0
    assert report.p6_drift_max == 0.0
    assert report.estimated_order == 2.01
    assert error_report(traj, harmonic).mean_error is None


def test_error_report_model_checks():
    with pytest.raises(ValueError):
        ErrorReport(mean_error=2.0, max_error=1.0)
    with pytest.raises(ValueError):
        ErrorReport(mean_error=1.0)
    with pytest.raises(ValueError):
        ErrorReport(energy_drift_max=math.inf)
    assert ErrorReport(estimated_order=-0.3).estimated_order == -0.3
