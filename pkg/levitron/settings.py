"""Run configuration: a YAML document with sections system, initial,
integrator, output and sweep.

Example::

    system:
      kind: levitron      # levitron | harmonic | driven
      a: 1.0
      c: 2.0
      sin_guard: 1.0e-8   # M defaults to 1/f''(1.5)
    initial:              # omit q/p for the documented default start
      spin: 6.0
      tilt: 0.05
    integrator:
      scheme: mpe         # vv | pv | rk4 | td_strang | mpe
      mpe_n: 2
      kernel: vv          # vv | pv | td
      h: 1.0e-3
      steps: 1000
    output:
      stride: 100
      trajectory: trajectory.csv
      report: report.json
      error_norm: full    # full | position
    sweep:
      spin_min: 2.0
      spin_max: 10.0
      points: 9
      horizon: 50.0
      escape_radius: 1.0

Every section is optional; missing keys take the defaults shown.
"""

import logging
import math
from typing import List, Literal, Mapping, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from levitron.config import DEFAULT_SPIN, DEFAULT_STRIDE, DEFAULT_TILT, REFERENCE_REFINEMENT
from levitron.core import HamiltonianSystem, PhaseState
from levitron.errors import ConfigurationError, NoRootError
from levitron.integrators import IntegratorSpec
from levitron.model import LevitronParams, LevitronSystem, default_initial_state
from levitron.testbeds import SYSTEM_KINDS

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class SystemSection(LevitronParams):
    kind: Literal["levitron", "harmonic", "driven"] = "levitron"

    @property
    def dimension(self) -> int:
        return 6 if self.kind == "levitron" else 1

    def params(self) -> LevitronParams:
        return LevitronParams(**self.model_dump(exclude={"kind"}))

    def build(self) -> HamiltonianSystem:
        if self.kind == "levitron":
            return LevitronSystem(self.params())
        return SYSTEM_KINDS[self.kind]()


class InitialSection(_Section):
    q: Optional[List[float]] = None
    p: Optional[List[float]] = None
    t: float = 0.0
    spin: float = DEFAULT_SPIN
    tilt: float = DEFAULT_TILT


class OutputSection(_Section):
    stride: int = Field(DEFAULT_STRIDE, ge=1)
    trajectory: str = "trajectory.csv"
    report: str = "report.json"
    error_norm: Literal["full", "position"] = "full"
    reference_refinement: int = Field(REFERENCE_REFINEMENT, ge=1)


class SweepSection(_Section):
    spins: Optional[List[float]] = None
    spin_min: Optional[float] = None
    spin_max: Optional[float] = None
    points: int = Field(0, ge=0)
    horizon: float = Field(50.0, gt=0)
    escape_radius: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _range_is_complete(self):
        if self.points and (self.spin_min is None or self.spin_max is None):
            raise ValueError("points needs both spin_min and spin_max")
        return self

    def values(self) -> List[float]:
        if self.spins is not None:
            return list(self.spins)
        if not self.points:
            return []
        return np.linspace(self.spin_min, self.spin_max, self.points).tolist()


def _number(value, default):
    if value is None:
        return default
    try:
        number = float(value)
    except (TypeError, ValueError):
        return None
    return number if math.isfinite(number) else None


def initial_state_issues(system: Mapping, initial: Mapping) -> List[str]:
    """Cross-section checks of the initial state against the system.

    Works on validated sections and on raw mappings alike, so the checks
    still run when other fields already failed validation.
    """
    kind = system.get("kind", "levitron")
    if kind not in ("levitron", *SYSTEM_KINDS):
        return []
    d = 6 if kind == "levitron" else 1
    q, p = initial.get("q"), initial.get("p")
    issues = []
    for name, values in (("q", q), ("p", p)):
        if isinstance(values, (list, tuple)) and len(values) != d:
            issues.append(
                f"initial.{name}: expected {d} entries for system.kind={kind}, got {len(values)}"
            )
    if (q is None) != (p is None):
        issues.append("initial: give both q and p, or neither")
    if kind == "levitron":
        raw_q4 = q[3] if isinstance(q, (list, tuple)) and len(q) == 6 else initial.get("tilt")
        q4 = _number(raw_q4, DEFAULT_TILT)
        guard = _number(system.get("sin_guard"), LevitronParams.model_fields["sin_guard"].default)
        if q4 is not None and guard is not None and guard > 0 and abs(math.sin(q4)) < guard:
            issues.append(
                f"initial.q: |sin q4| = {abs(math.sin(q4)):.3e} is below the "
                f"singularity guard system.sin_guard={guard:g}"
            )
    return issues


class RunConfig(_Section):
    system: SystemSection = SystemSection()
    initial: InitialSection = InitialSection()
    integrator: IntegratorSpec = IntegratorSpec()
    output: OutputSection = OutputSection()
    sweep: Optional[SweepSection] = None

    @model_validator(mode="after")
    def _initial_state_is_admissible(self):
        issues = initial_state_issues(self.system.model_dump(), self.initial.model_dump())
        if issues:
            raise ValueError("; ".join(issues))
        return self

    def build_system(self) -> HamiltonianSystem:
        return self.system.build()

    def initial_state(self, spin: Optional[float] = None) -> PhaseState:
        """Configured start, or the documented default; ``spin`` overrides p6."""
        init = self.initial
        if init.q is not None:
            p = list(init.p)
            if spin is not None:
                p[-1] = spin
            return PhaseState(init.q, p, init.t)
        if self.system.kind != "levitron":
            return PhaseState([1.0], [0.0], init.t)
        state = default_initial_state(
            self.system.params(), init.spin if spin is None else spin, init.tilt
        )
        return state.at(init.t)


def _describe(error) -> str:
    location = ".".join(str(part) for part in error["loc"]) or "config"
    return f"{location}: {error['msg']}"


def parse_config(text: str) -> RunConfig:
    """Parse and validate; all problems are collected into one ConfigurationError."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError([f"parse error: {exc}"]) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(["config: top level must be a mapping of sections"])
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        issues = [_describe(err) for err in exc.errors()]
        system, initial = data.get("system") or {}, data.get("initial") or {}
        if isinstance(system, dict) and isinstance(initial, dict):
            for issue in initial_state_issues(system, initial):
                if not any(issue in known for known in issues):
                    issues.append(issue)
        logger.error("invalid configuration: %s", issues)
        raise ConfigurationError(issues) from exc
    if config.system.kind == "levitron" and config.initial.q is None:
        try:
            config.initial_state()
        except NoRootError as exc:
            raise ConfigurationError([f"system.M: no stable axis equilibrium ({exc})"]) from exc
    return config


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as reader:
            text = reader.read()
    except OSError as exc:
        raise ConfigurationError([f"config: cannot read {path}: {exc}"]) from exc
    return parse_config(text)
