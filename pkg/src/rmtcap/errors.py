class RmtcapError(Exception):
    """Base class for library errors."""


class ParameterError(RmtcapError, ValueError):
    pass


class DecompositionError(RmtcapError, ArithmeticError):
    pass


class SingularSystemError(RmtcapError, ArithmeticError):
    pass


class FitError(RmtcapError, ArithmeticError):
    """Moment-matching system could not be solved reliably."""

    def __init__(self, message, *, condition=None, trial=None):
        super().__init__(message)
        self.condition = condition
        self.trial = trial


class DegenerateScenarioError(RmtcapError):
    """The selected cluster has no BSs or no users."""
