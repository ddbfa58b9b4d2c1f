"""Exception types raised across the package."""


class PhaseFluctError(Exception):
    """Base class for all package errors."""


class SpaceError(PhaseFluctError, ValueError):
    """Invalid mode-space construction."""


class DimensionBudgetExceeded(SpaceError):
    pass


class DuplicatePumpRole(SpaceError):
    pass


class EmptyModeList(SpaceError):
    pass


class InvalidModeIndex(PhaseFluctError, IndexError):
    pass


class SpaceMismatch(PhaseFluctError, ValueError):
    pass


class RoleMismatch(PhaseFluctError, ValueError):
    pass


class NonHermitianVariance(PhaseFluctError, ValueError):
    pass


class NegativeVariance(PhaseFluctError, ArithmeticError):
    pass


class NegativeMeanPhoton(PhaseFluctError, ValueError):
    pass


class ImaginaryResidueExceeded(PhaseFluctError, ArithmeticError):
    pass


class NumericalError(PhaseFluctError, ArithmeticError):
    """Truncation or accuracy failure; maps to CLI exit code 3."""


class InsufficientCutoff(NumericalError):
    pass


class LeakageExceeded(NumericalError):
    pass


class NonHermitianGenerator(PhaseFluctError, ValueError):
    pass


class InsufficientPoints(PhaseFluctError, ValueError):
    pass


class ErrorBelowFloor(PhaseFluctError, ValueError):
    pass


class SpecMismatch(PhaseFluctError, ValueError):
    pass


class ConfigError(PhaseFluctError, ValueError):
    """Configuration parse or validation failure.

    ``field`` names the offending key (dotted for nested tables), ``line``
    is set for syntax errors when the parser reports one.
    """

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
