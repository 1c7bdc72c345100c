"""Exception types shared across the simulator."""


class ProfilerSimError(Exception):
    """Base class for all simulator errors."""


class OutOfRangeError(ProfilerSimError, ValueError):
    """A depth (or other coordinate) fell outside the configured range."""


class DomainError(ProfilerSimError, ValueError):
    """An argument violated a mathematical precondition (e.g. non-positive density)."""


class NumericalFailure(ProfilerSimError, ArithmeticError):
    """A signal became non-finite during integration or filtering.

    Carries the name of the offending signal so traces can be cut at the
    last valid record.
    """

    def __init__(self, signal: str, value: float):
        self.signal = signal
        self.value = value
        super().__init__(f"non-finite value in signal '{signal}': {value!r}")


class ContractError(ProfilerSimError, RuntimeError):
    """A caller broke a stateful-call contract (e.g. time ran backwards)."""


class ConfigError(ProfilerSimError, ValueError):
    """A scenario configuration is syntactically or semantically invalid."""
