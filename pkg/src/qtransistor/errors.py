"""Exception and warning types shared across the package."""


class QTError(Exception):
    """Base class for domain errors. The CLI maps these to exit code 1."""


class ConfigError(QTError, ValueError):
    pass


class DegenerateDetuningError(QTError, ValueError):
    pass


class DomainError(QTError, ValueError):
    pass


class RequiresRationalError(QTError, TypeError):
    pass


class NoOddRatioSolution(QTError):
    pass


class NoGateSolution(QTError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class ScopeError(QTError):
    pass


class ResonantAtomError(QTError, ValueError):
    pass


class TruncationError(QTError):
    def __init__(self, message, tail_bound):
        super().__init__(message)
        self.tail_bound = tail_bound


class ResourceError(QTError):
    pass


class NumericalInstabilityError(QTError):
    def __init__(self, message, t, h):
        super().__init__(f"{message} (t={t!r}, h={h!r})")
        self.t = t
        self.h = h


class CrossCheckError(QTError, RuntimeError):
    """Two independent evaluation routes disagree beyond tolerance."""


class RegimeWarning(UserWarning):
    """Parameters sit outside the regime where an approximation holds."""


class DispersiveValidityWarning(UserWarning):
    pass


class ValidityWarning(UserWarning):
    pass
