"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """A parameter or parameter combination is physically or structurally invalid."""


class SolverError(RuntimeError):
    """Iterative solver failed to converge; carries the final residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class FieldSingularityError(ValueError):
    """Field evaluation requested at (or too close to) a point source."""


class InfeasibleError(ValueError):
    """Requested estimate cannot be reached for any shot count (e.g. zero signal)."""
