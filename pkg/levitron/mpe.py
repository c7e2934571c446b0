"""Multiproduct expansion: sum_i c_i T2^{k_i}(h/k_i) with k_i = i.

The weights come from the closed form c_i = prod_{j != i} k_i^2/(k_i^2 - k_j^2),
built in exact rational arithmetic, which reproduces the standard order
4, 6, 8 and 10 tableaux and extends past them.
"""

import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import cachetools

from levitron.config import TABLEAU_CACHE_SIZE
from levitron.core import HamiltonianSystem, PhaseState, affine_combine
from levitron.errors import ContractViolation, EvaluationFailure, IntegrationFailure
from levitron.integrators import Kernel, t2_substeps

logger = logging.getLogger(__name__)

MAX_TERMS = 12


@dataclass(frozen=True)
class MpeTableau:
    n: int
    substeps: Tuple[int, ...]
    weights: Tuple[Fraction, ...]

    @property
    def float_weights(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in self.weights)

    @property
    def order(self) -> int:
        return 2 * self.n

    @property
    def kernel_steps(self) -> int:
        """Kernel applications per macro step, n(n+1)/2."""
        return sum(self.substeps)

    def order_residuals(self):
        """Exact residuals [sum c_i - 1, sum c_i k_i^-2, ..., sum c_i k_i^-2(n-1)]."""
        residuals = [sum(self.weights) - 1]
        for m in range(1, self.n):
            residuals.append(
                sum(c * Fraction(1, k ** (2 * m)) for k, c in zip(self.substeps, self.weights))
            )
        return residuals

    def rows(self):
        return list(zip(self.substeps, self.weights))


@cachetools.cached(
    cache=cachetools.LRUCache(maxsize=TABLEAU_CACHE_SIZE), lock=threading.Lock()
)
def mpe_coefficients(n: int) -> MpeTableau:
    if not isinstance(n, int) or n < 1:
        raise ContractViolation(f"number of MPE terms must be an integer >= 1, got {n!r}")
    if n > MAX_TERMS:
        raise ContractViolation(f"at most {MAX_TERMS} MPE terms are supported, got {n}")
    ks = tuple(range(1, n + 1))
    weights = []
    for ki in ks:
        c = Fraction(1)
        for kj in ks:
            if kj != ki:
                c *= Fraction(ki * ki, ki * ki - kj * kj)
        weights.append(c)
    logger.debug("built MPE tableau n=%s: %s", n, weights)
    return MpeTableau(n=n, substeps=ks, weights=tuple(weights))


def mpe_step(
    system: HamiltonianSystem,
    state: PhaseState,
    h: float,
    n: int,
    kernel: Kernel = "vv",
    executor=None,
) -> PhaseState:
    """Order-2n macro step from n independent substep runs.

    With an ``executor`` the runs go through ``executor.map``; results are
    combined in k order either way.
    """
    tableau = mpe_coefficients(n)

    def run(k):
        try:
            return t2_substeps(system, state, h, k, kernel)
        except IntegrationFailure as exc:
            exc.k = k
            raise

    if executor is None:
        results = [run(k) for k in tableau.substeps]
    else:
        results = list(executor.map(run, tableau.substeps))
    try:
        return affine_combine(results, tableau.float_weights)
    except EvaluationFailure as exc:
        raise IntegrationFailure(f"extrapolated state: {exc}", state=state) from exc


def format_coefficients(n: int, rational: bool = False) -> str:
    """Text table of (k_i, c_i); exact fractions when ``rational``."""
    lines = []
    for k, c in mpe_coefficients(n).rows():
        value = str(c) if rational else f"{float(c):.17g}"
        lines.append(f"{k} {value}")
    return "\n".join(lines) + "\n"
