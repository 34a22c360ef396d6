"""Exception hierarchy shared across the package."""


class PlatoonError(Exception):
    """Base class for all errors raised by qplatoon."""


class ConfigurationError(PlatoonError, ValueError):
    """Invalid scenario, topology, or parameter values."""


class DimensionError(PlatoonError, ValueError):
    """Matrix or vector shapes do not agree."""


class PreconditionError(PlatoonError, ValueError):
    """An operation was called with inputs violating its contract."""


class NumericalError(PlatoonError, ArithmeticError):
    """A numerical routine failed or produced an inaccurate result."""


class SynthesisError(PlatoonError):
    """No admissible controller gain could be computed."""


class DivergenceError(PlatoonError, ArithmeticError):
    """A simulation produced non-finite states."""

    def __init__(self, time, vehicle):
        self.time = time
        self.vehicle = vehicle
        super().__init__(f"non-finite state for vehicle {vehicle} at t={time:.6g} s")


class ProtocolError(PlatoonError, ValueError):
    """A controller received a message set inconsistent with the topology."""
