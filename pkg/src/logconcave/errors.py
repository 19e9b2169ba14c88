"""Exception hierarchy shared by all modules."""


class LogConcaveError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(LogConcaveError, ValueError):
    pass


class NonNormalizable(LogConcaveError):
    pass


class EmptyRestriction(LogConcaveError):
    pass


class NonConverged(LogConcaveError):
    pass


class NotLogConcave(LogConcaveError):
    pass


class NotAbsolutelyContinuous(LogConcaveError):
    pass


class GridMismatch(LogConcaveError):
    pass


class LPFailure(LogConcaveError):
    pass


class UnknownFormula(LogConcaveError, KeyError):
    pass


class MissingInput(LogConcaveError, KeyError):
    pass


class NoApplicableFormula(LogConcaveError):
    pass


class PreconditionError(LogConcaveError):
    pass


class WitnessNotFound(LogConcaveError):
    pass


class ConfigError(LogConcaveError):
    """Raised with the full list of diagnostics found in a config file."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
