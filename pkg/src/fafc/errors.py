"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(ArithmeticError):
    """A rational fit's denominator vanished at the evaluation point."""

    def __init__(self, x: float, denominator: float):
        super().__init__(f"rational fit denominator {denominator:.3e} is near zero at x={x!r}")
        self.x = x
        self.denominator = denominator


class SimulationError(RuntimeError):
    """A structural invariant of the scheduler was violated."""
