"""Exception types raised across the package."""


class HbodeError(Exception):
    """Base class for all package errors."""


class ContractViolation(HbodeError, ValueError):
    """An input violated an operation's precondition (shape, range, sign)."""


class DegenerateScheduleError(HbodeError, ValueError):
    """The friction schedule collapses to zero (``L2 == 0`` or ``delta_f == 0``).

    Supply the friction coefficient explicitly instead.
    """


class HorizonTooShortError(HbodeError, ValueError):
    """``T <= 3 / (2 alpha)``, so the finite-horizon bound is vacuous."""


class DivergenceError(HbodeError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InsufficientCheckpointsError(HbodeError, ValueError):
    pass


class WeightNormalizationError(HbodeError, ValueError):
    pass


class SchemaError(HbodeError, ValueError):
    """A CSV file does not match any of the known column layouts."""


class ConfigError(HbodeError, ValueError):
    pass
