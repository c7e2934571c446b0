"""Exception hierarchy shared by every module of the package."""


class LevitronError(Exception):
    """Base class for all library errors."""


class ContractViolation(LevitronError, ValueError):
    """A caller broke a precondition (shapes, times, weights, ranges)."""


class EvaluationFailure(LevitronError):
    """Energy or a derivative field came out non-finite."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class SingularityError(EvaluationFailure):
    """Euler-angle gimbal lock: |sin q4| fell below the guard."""


class NoRootError(LevitronError):
    """The equilibrium bracket holds no sign change."""


class IntegrationFailure(LevitronError):
    """A stepper could not complete a step.

    ``step`` is the macro step index (filled in by the trajectory driver),
    ``substep`` the sub-map inside the step and ``k`` the MPE substep count
    whose run failed. ``state`` is the last good state.
    """

    def __init__(self, message, *, step=None, substep=None, k=None, state=None):
        super().__init__(message)
        self.step = step
        self.substep = substep
        self.k = k
        self.state = state

    def __str__(self):
        where = []
        if self.step is not None:
            where.append(f"step={self.step}")
        if self.k is not None:
            where.append(f"k={self.k}")
        if self.substep is not None:
            where.append(f"substep={self.substep}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


class ConfigurationError(LevitronError):
    """Run configuration is unreadable or invalid; ``issues`` lists every problem."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))
