"""Exception types shared across the package."""


class WeakLoopError(Exception):
    """Base class for all package errors."""


class DomainError(WeakLoopError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(WeakLoopError, ValueError):
    """A problem instance or run configuration is inconsistent."""


class ConsistencyError(WeakLoopError, RuntimeError):
    """An internal invariant of the simulation was violated."""


class CappedRunError(WeakLoopError, RuntimeError):
    """A trial hit its ``max_iterations`` safety cap before succeeding.

    The partially filled record is available as ``record`` and the trial
    index (when raised from a Monte Carlo batch) as ``trial``.
    """

    def __init__(self, message, record=None, trial=None):
        super().__init__(message)
        self.record = record
        self.trial = trial

    def __reduce__(self):
        return type(self), (self.args[0], self.record, self.trial)
