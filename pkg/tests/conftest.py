import math

import numpy as np
import pytest

from levitron.core import HamiltonianSystem, PhaseState
from levitron.model import LevitronParams, LevitronSystem
from levitron.testbeds import DrivenOscillator, FreeParticle, HarmonicOscillator


@pytest.fixture
def harmonic():
    return HarmonicOscillator()


@pytest.fixture
def free_particle():
    return FreeParticle()


@pytest.fixture
def driven():
    return DrivenOscillator()


@pytest.fixture
def params():
    return LevitronParams()


@pytest.fixture
def levitron(params):
    return LevitronSystem(params)


def random_admissible_states(count=100, seed=1234, min_sin=0.05, bound=2.0):
    """States with |q|_inf, |p|_inf <= bound and |sin q4| >= min_sin."""
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        q = rng.uniform(-bound, bound, 6)
        p = rng.uniform(-bound, bound, 6)
        if abs(math.sin(q[3])) >= min_sin:
            states.append(PhaseState(q, p))
    return states


@pytest.fixture
def admissible_states():
    return random_admissible_states()


class CountingSystem(HamiltonianSystem):
    """Delegates to ``inner`` and counts field evaluations."""

    def __init__(self, inner):
        self.inner = inner
        self.dimension = inner.dimension
        self.drifts = 0
        self.kicks = 0

    def energy(self, state, t=None):
        return self.inner.energy(state, t)

    def dh_dp(self, state, t=None):
        self.drifts += 1
        return self.inner.dh_dp(state, t)

    def dh_dq(self, state, t=None):
        self.kicks += 1
        return self.inner.dh_dq(state, t)
