"""Exception types raised across the package."""


class MetastabilityError(Exception):
    """Base class for all package errors."""


class ModelError(MetastabilityError, ValueError):
    pass


class BalanceViolation(ModelError):
    """The diffusion-weighted reaction integral does not vanish."""


class SignViolation(ModelError):
    """The effective potential is not positive between the wells."""


class NotBistable(ModelError):
    """A well has the wrong derivative sign and no degeneracy was declared."""


class DegenerateModel(ModelError):
    """A quantity requiring non-degenerate wells was requested."""


class QuadratureFailure(MetastabilityError, ArithmeticError):
    pass


class NonMonotone(MetastabilityError, ValueError):
    pass


class ConfigViolation(MetastabilityError, ValueError):
    pass


class BlowUp(MetastabilityError, FloatingPointError):
    pass


class StabilityViolation(MetastabilityError, ValueError):
    pass


class InvalidA(MetastabilityError, ValueError):
    pass


class _KeyMessage(KeyError):
    # KeyError quotes its message; keep it readable
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class MissingDiagnostics(MetastabilityError, _KeyMessage):
    pass


class EmptyInput(MetastabilityError, ValueError):
    pass


class InsufficientData(MetastabilityError, ValueError):
    pass


class UnknownPreset(MetastabilityError, _KeyMessage):
    pass


class IOFailure(MetastabilityError, OSError):
    pass


class TrackingAmbiguity(UserWarning):
    """Two tracked layers fell within one grid cell before any collapse."""
