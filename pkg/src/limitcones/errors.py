"""Exception hierarchy. CLI exit codes are attached to the classes."""


class LimitConeError(Exception):
    exit_code = 1


class InvalidInputError(LimitConeError, ValueError):
    exit_code = 1


class InvalidFormError(InvalidInputError):
    """A linear form fails to be positive on the sampled limit cone."""


class EmptyEstimateError(InvalidInputError):
    """No element survived the norm cutoff."""


class BudgetExceededError(LimitConeError):
    exit_code = 2


class InfeasibleError(LimitConeError):
    """A separating form could not be found; ``root`` names the culprit."""

    exit_code = 3

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class ScaleOverflowError(LimitConeError, OverflowError):
    exit_code = 2
