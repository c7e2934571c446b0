"""Dimensionless Levitron: ring-dipole potential, Hamiltonian and vector fields.

Lengths are in units of the base-plate radius, energies in units of the
gravitational energy scale, so time runs in units of sqrt(R/g); the
dimensional mass, gravity, radius and moment are absorbed into a, c and M.

Coordinates: q1..q3 = centre of mass (X, Y, Z), q4 = tilt theta,
q5 = precession phi, q6 = spin psi (cyclic, so p6 is conserved).
"""

import logging
import math
from typing import NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from levitron.config import DEFAULT_SPIN, DEFAULT_TILT, STABLE_AXIS_BRACKET
from levitron.core import HamiltonianSystem, PhaseState
from levitron.errors import ContractViolation, NoRootError, SingularityError

logger = logging.getLogger(__name__)


def axis_f(z: float) -> float:
    """On-axis potential f(z) = z (1+z^2)^(-3/2)."""
    return z * (1.0 + z * z) ** -1.5


def axis_f1(z: float) -> float:
    return (1.0 - 2.0 * z * z) * (1.0 + z * z) ** -2.5


def axis_f2(z: float) -> float:
    return 3.0 * z * (2.0 * z * z - 3.0) * (1.0 + z * z) ** -3.5


def default_coupling() -> float:
    """M that puts an on-axis equilibrium at z = 1.5."""
    return 1.0 / axis_f2(1.5)


class LevitronParams(BaseModel):
    """a, c: transverse and axial moments of inertia; M: magnetic coupling."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    a: float = Field(1.0, gt=0)
    c: float = Field(2.0, gt=0)
    M: float = Field(default_factory=default_coupling)
    sin_guard: float = Field(1e-8, gt=0)


class PsiJet(NamedTuple):
    value: float
    x: float
    y: float
    z: float
    xx: float
    yy: float
    zz: float
    xz: float
    yz: float


def psi(X: float, Y: float, Z: float) -> float:
    """Ring-dipole potential, paraxial expansion to second order in X, Y."""
    w = 1.0 + Z * Z
    return Z * w**-1.5 - (X * X + Y * Y) * 0.75 * (2.0 * Z * Z - 3.0) * Z * w**-3.5


def psi_jet(X: float, Y: float, Z: float) -> PsiJet:
    """Psi with its gradient and the second derivatives the fields need.

    With Psi = f(Z) - (X^2+Y^2) g(Z) the mixed XY derivative vanishes
    identically, and f'' = 4 g makes the on-axis Laplacian zero.
    """
    zz = Z * Z
    w = 1.0 + zz
    rho2 = X * X + Y * Y
    g = 0.75 * (2.0 * zz - 3.0) * Z * w**-3.5
    g1 = 0.75 * (-8.0 * zz * zz + 24.0 * zz - 3.0) * w**-4.5
    g2 = 3.75 * Z * (8.0 * zz * zz - 40.0 * zz + 15.0) * w**-5.5
    f = Z * w**-1.5
    f1 = (1.0 - 2.0 * zz) * w**-2.5
    f2 = 4.0 * g
    return PsiJet(
        value=f - rho2 * g,
        x=-2.0 * X * g,
        y=-2.0 * Y * g,
        z=f1 - rho2 * g1,
        xx=-2.0 * g,
        yy=-2.0 * g,
        zz=f2 - rho2 * g2,
        xz=-2.0 * X * g1,
        yz=-2.0 * Y * g1,
    )


def _angles(params: LevitronParams, q) -> Tuple[float, float, float, float]:
    s4 = math.sin(q[3])
    if abs(s4) < params.sin_guard:
        raise SingularityError(
            f"gimbal lock: |sin q4| = {abs(s4):.3e} below sin_guard "
            f"{params.sin_guard:.3e}",
            component="q4",
        )
    return s4, math.cos(q[3]), math.sin(q[4]), math.cos(q[4])


def levitron_energy(params: LevitronParams, state: PhaseState) -> float:
    q, p = state.q, state.p
    s4, c4, s5, c5 = _angles(params, q)
    a = params.a
    jet = psi_jet(q[0], q[1], q[2])
    u = p[4] - p[5] * c4
    kinetic = 0.5 * (
        p[0] * p[0]
        + p[1] * p[1]
        + p[2] * p[2]
        + p[3] * p[3] / a
        + u * u / (a * s4 * s4)
        + p[5] * p[5] / params.c
    )
    magnetic = -params.M * (s4 * (c5 * jet.x + s5 * jet.y) + c4 * jet.z)
    return float(kinetic + magnetic + q[2])


def dq_dt(params: LevitronParams, state: PhaseState) -> np.ndarray:
    """dH/dp (operator A)."""
    q, p = state.q, state.p
    s4, c4, _, _ = _angles(params, q)
    a = params.a
    denom = a * s4 * s4
    return np.array(
        [
            p[0],
            p[1],
            p[2],
            p[3] / a,
            (p[4] - p[5] * c4) / denom,
            (p[5] * (c4 * c4 + (a / params.c) * s4 * s4) - p[4] * c4) / denom,
        ]
    )


def _grad_q(params: LevitronParams, state: PhaseState) -> np.ndarray:
    q, p = state.q, state.p
    s4, c4, s5, c5 = _angles(params, q)
    a, M = params.a, params.M
    jet = psi_jet(q[0], q[1], q[2])
    u = p[4] - p[5] * c4
    dkin4 = p[5] * u / (a * s4) - u * u * c4 / (a * s4 * s4 * s4)
    return np.array(
        [
            -M * (s4 * c5 * jet.xx + c4 * jet.xz),
            -M * (s4 * s5 * jet.yy + c4 * jet.yz),
            -M * (s4 * (c5 * jet.xz + s5 * jet.yz) + c4 * jet.zz) + 1.0,
            dkin4 - M * (c4 * (c5 * jet.x + s5 * jet.y) - s4 * jet.z),
            -M * s4 * (c5 * jet.y - s5 * jet.x),
            0.0,
        ]
    )


def dp_dt(params: LevitronParams, state: PhaseState) -> np.ndarray:
    """-dH/dq (operator B); the q6 entry is the literal 0."""
    grad = _grad_q(params, state)
    out = -grad
    out[5] = 0.0
    return out


def find_axis_equilibrium(
    params: LevitronParams, bracket: Tuple[float, float], tol: float = 1e-12
) -> float:
    """Bisection root of M f''(z) - 1, the stationary point of U(z) = -M f'(z) + z."""
    lo, hi = bracket
    if not lo < hi:
        raise ContractViolation(f"bracket must satisfy z_lo < z_hi, got {bracket}")

    def residual(z):
        return params.M * axis_f2(z) - 1.0

    g_lo, g_hi = residual(lo), residual(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoRootError(
            f"M f''(z) - 1 has no sign change on [{lo}, {hi}] "
            f"(values {g_lo:.3e}, {g_hi:.3e})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = residual(mid)
        if abs(g_mid) <= tol or mid in (lo, hi):
            break
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    logger.debug("axis equilibrium z*=%s residual=%s", mid, g_mid)
    return mid


def default_initial_state(
    params: LevitronParams, spin: float = DEFAULT_SPIN, tilt: float = DEFAULT_TILT
) -> PhaseState:
    """On-axis at the vertically stable equilibrium, slightly tilted, spinning.

    p5 = p6 cos q4 so the top starts without precession.
    """
    z_star = find_axis_equilibrium(params, STABLE_AXIS_BRACKET)
    return PhaseState(
        [0.0, 0.0, z_star, tilt, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, spin * math.cos(tilt), spin],
        0.0,
    )


class LevitronSystem(HamiltonianSystem):
    """The Levitron wired into the system contract."""

    dimension = 6
    cyclic_momentum = 5

    def __init__(self, params: LevitronParams = None):
        self.params = params or LevitronParams()

    def energy(self, state, t=None):
        return levitron_energy(self.params, state)

    def dh_dp(self, state, t=None):
        return dq_dt(self.params, state)

    def dh_dq(self, state, t=None):
        return _grad_q(self.params, state)

    def __repr__(self):
        return f"LevitronSystem({self.params!r})"
