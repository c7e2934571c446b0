import math

import numpy as np
import pytest

from conftest import CountingSystem
from levitron.core import PhaseState
from levitron.diagnostics import convergence_order
from levitron.errors import ContractViolation, IntegrationFailure
from levitron.integrators import (
    IntegratorSpec,
    Scheme,
    pv_step,
    rk4_step,
    t2_substeps,
    td_strang_step,
    vv_step,
)
from levitron.model import LevitronParams, LevitronSystem, default_initial_state
from levitron.propagation import integrate
from levitron.testbeds import HarmonicOscillator

START = PhaseState([1.0], [0.0])


def final_error(system, scheme, h, horizon=10.0, state=START):
    steps = round(horizon / h)
    spec = IntegratorSpec(scheme=scheme, h=h, steps=steps)
    traj = integrate(system, state, spec, stride=steps)
    last = traj.state(len(traj) - 1)
    exact = HarmonicOscillator.exact_state(state, last.t)
    return math.hypot(last.q[0] - exact.q[0], last.p[0] - exact.p[0])


def test_vv_step_on_oscillator(harmonic):
    out = vv_step(harmonic, START, 0.1)
    assert out.q[0] == pytest.approx(0.995, abs=1e-15)
    assert out.p[0] == pytest.approx(-0.09975, abs=1e-15)
    assert out.t == pytest.approx(0.1)


def test_pv_step_on_oscillator(harmonic):
    out = pv_step(harmonic, START, 0.1)
    assert out.q[0] == pytest.approx(0.995, abs=1e-15)
    assert out.p[0] == pytest.approx(-0.1, abs=1e-15)


def test_rk4_step_on_oscillator(harmonic):
    out = rk4_step(harmonic, START, 0.1)
    assert out.q[0] == pytest.approx(0.99500416667, abs=1e-11)
    assert out.p[0] == pytest.approx(-0.09983333333, abs=1e-11)


def test_free_particle_drift_is_exact(free_particle):
    for step in (vv_step, pv_step, rk4_step):
        out = step(free_particle, PhaseState([0.0], [1.0]), 0.25)
        assert out.q[0] == pytest.approx(0.25, abs=1e-15)
        assert out.p[0] == 1.0


@pytest.mark.parametrize("step", [vv_step, pv_step, rk4_step, td_strang_step])
def test_zero_step_is_identity(harmonic, step):
    state = PhaseState([0.3], [-0.7], 1.5)
    out = step(harmonic, state, 0.0)
    assert out.q.tolist() == state.q.tolist()
    assert out.p.tolist() == state.p.tolist()
    assert out.t == 1.5


@pytest.mark.parametrize("step", [vv_step, pv_step])
def test_splittings_are_time_reversible(harmonic, step):
    state = PhaseState([0.8], [0.4])
    back = step(harmonic, step(harmonic, state, 0.1), -0.1)
    assert back.q[0] == pytest.approx(0.8, abs=1e-12)
    assert back.p[0] == pytest.approx(0.4, abs=1e-12)


def test_vv_map_preserves_phase_area(harmonic):
    eps = 1e-6
    base = np.array([1.0, 0.0])
    jac = np.empty((2, 2))
    for i in range(2):
        plus, minus = base.copy(), base.copy()
        plus[i] += eps
        minus[i] -= eps
        out_plus = vv_step(harmonic, PhaseState.from_vector(plus), 0.1).vector()
        out_minus = vv_step(harmonic, PhaseState.from_vector(minus), 0.1).vector()
        jac[:, i] = (out_plus - out_minus) / (2 * eps)
    assert np.linalg.det(jac) == pytest.approx(1.0, abs=1e-8)


def test_t2_substeps_single_is_kernel(harmonic):
    assert t2_substeps(harmonic, START, 0.1, 1).vector().tolist() == vv_step(
        harmonic, START, 0.1
    ).vector().tolist()


def test_t2_substeps_two_halves(harmonic):
    out = t2_substeps(harmonic, START, 0.1, 2)
    assert out.q[0] == pytest.approx(0.9950031, abs=1e-7)
    assert out.p[0] == pytest.approx(-0.0998126, abs=1e-7)
    assert out.t == pytest.approx(0.1)


def test_t2_substeps_is_repeated_kernel(harmonic):
    state = START
    for _ in range(3):
        state = vv_step(harmonic, state, 0.1 / 3)
    out = t2_substeps(harmonic, START, 0.1, 3)
    assert out.vector().tolist() == state.vector().tolist()


def test_t2_substeps_argument_checks(harmonic):
    with pytest.raises(ContractViolation):
        t2_substeps(harmonic, START, 0.1, 0)
    with pytest.raises(ContractViolation):
        t2_substeps(harmonic, START, 0.1, 2, kernel="leapfrog")


def test_kernel_evaluation_counts(harmonic):
    counting = CountingSystem(harmonic)
    t2_substeps(counting, START, 0.1, 4)
    assert counting.drifts == 4
    assert counting.kicks == 8


def test_td_strang_equals_vv_when_autonomous(harmonic, levitron, params):
    state = PhaseState([0.4], [-0.2], 0.7)
    assert td_strang_step(harmonic, state, 0.05).vector().tolist() == vv_step(
        harmonic, state, 0.05
    ).vector().tolist()
    top = default_initial_state(params)
    assert td_strang_step(levitron, top, 1e-3).vector().tolist() == vv_step(
        levitron, top, 1e-3
    ).vector().tolist()


def test_vv_is_second_order(harmonic):
    coarse = final_error(harmonic, Scheme.VV, 0.1)
    fine = final_error(harmonic, Scheme.VV, 0.05)
    assert coarse / fine == pytest.approx(4.0, rel=0.1)


def test_rk4_is_fourth_order(harmonic):
    pairs = [(h, final_error(harmonic, Scheme.RK4, h)) for h in (0.1, 0.05, 0.025)]
    assert convergence_order(pairs) == pytest.approx(4.0, abs=0.1)


def test_td_strang_is_second_order_on_driven_oscillator(driven):
    horizon = 10.0
    ref_spec = IntegratorSpec(scheme=Scheme.RK4, h=2.5e-4, steps=40000)
    ref = integrate(driven, START, ref_spec, stride=40000)
    target = ref.state(len(ref) - 1)
    pairs = []
    for h in (0.1, 0.05, 0.025):
        steps = round(horizon / h)
        spec = IntegratorSpec(scheme=Scheme.TD_STRANG, h=h, steps=steps)
        traj = integrate(driven, START, spec, stride=steps)
        last = traj.state(len(traj) - 1)
        assert last.t == pytest.approx(horizon)
        pairs.append((h, float(np.linalg.norm(last.vector() - target.vector()))))
    assert convergence_order(pairs) == pytest.approx(2.0, abs=0.1)


def test_integrate_samples_every_stride(harmonic):
    spec = IntegratorSpec(scheme=Scheme.VV, h=0.1, steps=25)
    traj = integrate(harmonic, PhaseState([1.0], [0.0], 2.0), spec, stride=10)
    assert len(traj) == 25 // 10 + 1
    assert traj.times.tolist() == pytest.approx([2.0, 3.0, 4.0])


def test_integrate_stops_early(harmonic):
    spec = IntegratorSpec(scheme=Scheme.VV, h=0.1, steps=100)
    traj = integrate(harmonic, START, spec, stride=1, stop_when=lambda s: s.q[0] < 0)
    assert traj.q[-1, 0] < 0 <= traj.q[-2, 0]


def test_integrate_reports_failing_step():
    # the tilt collapses through the guard within a few steps
    system = LevitronSystem(LevitronParams(sin_guard=0.05))
    state = PhaseState([0.0, 0.0, 2.0, 0.06, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0, 0.0, 0.0])
    spec = IntegratorSpec(scheme=Scheme.VV, h=1e-3, steps=100)
    with pytest.raises(IntegrationFailure) as info:
        integrate(system, state, spec, stride=10)
    assert info.value.step is not None and info.value.step < 100
    assert info.value.substep is not None
    assert abs(math.sin(info.value.state.q[3])) >= 0.05


def test_spec_labels():
    assert IntegratorSpec.from_label("mpe6", 0.1, 10).mpe_n == 3
    assert IntegratorSpec.from_label("td", 0.1, 10).scheme is Scheme.TD_STRANG
    assert IntegratorSpec(scheme=Scheme.MPE, mpe_n=4).label == "mpe8"
    with pytest.raises(ContractViolation):
        IntegratorSpec.from_label("mpe5", 0.1, 10)
    with pytest.raises(ContractViolation):
        IntegratorSpec.from_label("euler", 0.1, 10)
    with pytest.raises(ValueError):
        IntegratorSpec(h=0.0)
