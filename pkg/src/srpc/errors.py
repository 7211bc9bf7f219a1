"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter/input problems exit with 2,
I/O problems (plain OSError) with 3, and internal invariant violations
with 4.
"""


class ParameterError(ValueError):
    """A numeric or structural parameter is outside its allowed range."""


class InputError(ValueError):
    """Malformed caller-supplied data (vertices out of range, bad files, ...)."""


class BudgetExceededError(ParameterError):
    """An enumeration was refused because it would exceed the configured budget."""


class NonConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap.

    Carries the last estimate so callers can still inspect it.
    """

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class InternalInvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
