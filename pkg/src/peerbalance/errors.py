"""Exception types shared across the package."""


class DegenerateDistributionError(ValueError):
    """Raised when a distribution cannot be formed (total energy is zero)."""


class InsufficientEnergyError(ValueError):
    """Raised when a transfer would drive the sender's energy below zero."""


class InvalidPairError(ValueError):
    """Raised when an interaction pair is malformed (identical agents)."""


class ScheduleExhaustedError(RuntimeError):
    """Raised when a scripted schedule is asked for more pairs than it holds."""


class EnumerationGuardError(ValueError):
    """Raised when an exact enumeration would exceed the configured pair cap."""


class WrongRegimeError(ValueError):
    """Raised when an analytical check is invoked outside its regime."""
