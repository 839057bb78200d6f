"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical or physical domain of an operation."""


class ResourceLimitError(RuntimeError):
    """A request would exceed a documented exhaustive-enumeration guard."""


class ConvergenceError(RuntimeError):
    """The saddle-point solver exhausted its iteration budget.

    Carries the last iterate so callers can inspect or report it.
    """

    def __init__(self, beta: float, last_a: float, residual: float, iterations: int):
        self.beta = beta
        self.last_a = last_a
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"saddle solve did not converge at beta={beta:g} after "
            f"{iterations} evaluations (last a={last_a:.12g}, residual={residual:.3g})"
        )
