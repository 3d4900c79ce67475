"""Exception hierarchy.

Everything raised on bad user input derives from :class:`EquivbootError`
(itself a ``ValueError``), so the CLI can map it to exit code 2.
"""


class EquivbootError(ValueError):
    pass


class NegativeEntry(EquivbootError):
    pass


class SumNotOne(EquivbootError):
    pass


class DimensionTooSmall(EquivbootError):
    pass


class DimensionMismatch(EquivbootError):
    pass


class InvalidCounts(EquivbootError):
    pass


class InvalidConfig(EquivbootError):
    pass


class DomainError(EquivbootError):
    """A positive count met a zero probability in the log-likelihood."""


class EpsilonInfeasible(EquivbootError):
    pass


class NoConvergence(EquivbootError):
    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class EmptySample(EquivbootError):
    pass


class BadWeights(EquivbootError):
    pass


class BadDelta(EquivbootError):
    pass


class BadDimension(EquivbootError):
    pass
