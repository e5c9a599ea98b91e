"""Exception types shared across the package."""


class ModelError(ValueError):
    """Invalid model input: bad graph document, broken invariant, bad parameter."""


class SolverError(RuntimeError):
    """Numerical solve failed (e.g. value iteration did not converge)."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
