"""Exception hierarchy shared by all modules."""


class SIRControlError(Exception):
    """Base class for every error raised by this package."""


class InvalidStateError(SIRControlError, ValueError):
    """Compartment shares are negative, non-finite or exceed one."""


class InvalidParamsError(SIRControlError, ValueError):
    pass


class InvalidControlError(SIRControlError, ValueError):
    """A strategy definition or evaluation left the unit interval."""


class DomainError(SIRControlError, ValueError):
    pass


class BelowMinimumError(DomainError):
    """No preimage exists: the target lies below the function minimum."""


class IntegrationDivergedError(SIRControlError, ArithmeticError):
    """The integrator produced a non-finite state; the step is too large."""


class HorizonTooShortError(SIRControlError, ValueError):
    pass


class UnboundedCostError(SIRControlError, ValueError):
    pass


class AmplitudeTooSmallError(SIRControlError, ValueError):
    pass


class NoOutbreakError(SIRControlError, ValueError):
    """Raised when R0 <= 1, where there is nothing to optimize."""


class BudgetInfeasibleError(SIRControlError, ValueError):
    pass
