"""Exception hierarchy shared by the library and the CLI."""


class QueensError(Exception):
    """Base class for all errors raised by queenscount."""


class InfeasibleSpec(QueensError, ValueError):
    """Fixed cells cannot all hold a queen in the requested embedding."""


class IllegalMove(QueensError, ValueError):
    """A move touches a pinned row or leaves the board."""


class EstimatorError(QueensError, RuntimeError):
    """An estimator could not produce a result."""


class StallError(EstimatorError):
    """A level-finding loop could not make progress."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class BudgetExhausted(EstimatorError):
    """The configured budget of energy evaluations ran out."""

    def __init__(self, message, used=None):
        super().__init__(message)
        self.used = used


class ConvergenceError(EstimatorError):
    """An adaptive scheme failed to meet its stopping rule."""
