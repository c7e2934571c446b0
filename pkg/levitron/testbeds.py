"""Small systems with known behaviour, used by convergence runs and tests."""

import math

import numpy as np

from levitron.core import HamiltonianSystem, PhaseState, TimeDependentSystem


class HarmonicOscillator(HamiltonianSystem):
    """H = (p^2 + q^2) / 2 in one degree of freedom."""

    dimension = 1

    def energy(self, state, t=None):
        return 0.5 * (float(state.p @ state.p) + float(state.q @ state.q))

    def dh_dp(self, state, t=None):
        return state.p.copy()

    def dh_dq(self, state, t=None):
        return state.q.copy()

    @staticmethod
    def exact_state(state0: PhaseState, t: float) -> PhaseState:
        """Rotation of (q, p) by the elapsed time."""
        tau = t - state0.t
        c, s = math.cos(tau), math.sin(tau)
        return PhaseState(c * state0.q + s * state0.p, c * state0.p - s * state0.q, t)


class FreeParticle(HamiltonianSystem):
    """H = p^2 / 2; the drift is its exact flow."""

    dimension = 1

    def energy(self, state, t=None):
        return 0.5 * float(state.p @ state.p)

    def dh_dp(self, state, t=None):
        return state.p.copy()

    def dh_dq(self, state, t=None):
        return np.zeros_like(state.q)


class DrivenOscillator(TimeDependentSystem):
    """H(t) = p^2/2 + q^2/2 - q sin(t)."""

    dimension = 1

    def energy(self, state, t=None):
        tau = self.evaluation_time(state, t)
        q, p = float(state.q[0]), float(state.p[0])
        return 0.5 * p * p + 0.5 * q * q - q * math.sin(tau)

    def dh_dp(self, state, t=None):
        return state.p.copy()

    def dh_dq(self, state, t=None):
        tau = self.evaluation_time(state, t)
        return state.q - math.sin(tau)


SYSTEM_KINDS = {
    "harmonic": HarmonicOscillator,
    "driven": DrivenOscillator,
}
