"""Exception and warning types shared across the package."""


class NFRangeError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(NFRangeError, ValueError):
    pass


class UnsupportedModeError(NFRangeError, ValueError):
    """Raised when an operation is requested for a distance mode it does not handle."""


class UnsupportedConfigurationError(NFRangeError, ValueError):
    """Raised when a closed form exists only for tagged SIMO/MIMO layouts."""


class DegenerateScenarioError(NFRangeError, ArithmeticError):
    """The scenario carries no range information (zero Fisher information)."""


class NumericalAccuracyError(NFRangeError, ArithmeticError):
    pass


class WindowCoverageError(NFRangeError, ValueError):
    """A hypothesised delay pushes the model signal outside the sampled window."""


class AssumptionWarning(UserWarning):
    """A scenario violates the validity range of an approximation."""
