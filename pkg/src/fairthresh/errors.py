"""Exception and warning types raised across the package."""


class FairThreshError(Exception):
    """Base class for all package errors."""


class DomainError(FairThreshError, ValueError):
    """A score lies outside the support bounds of a distribution."""


class InconsistentInput(FairThreshError, ValueError):
    pass


class DegenerateProfile(FairThreshError, ValueError):
    pass


class UnsupportedCriterion(FairThreshError, ValueError):
    pass


class InfeasibleConstraint(FairThreshError):
    """No threshold pair satisfies the fairness constraint at the requested tolerance.

    ``min_epsilon`` carries the smallest tolerance that would have been feasible
    on the search lattice.
    """

    def __init__(self, message, min_epsilon=None):
        super().__init__(message)
        self.min_epsilon = min_epsilon


class SolverUnavailable(FairThreshError):
    pass


class InsufficientData(FairThreshError, ValueError):
    pass


class ParseError(FairThreshError, ValueError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(FairThreshError, ValueError):
    pass


class DegenerateDensityWarning(UserWarning):
    """Both class-conditional densities vanish at a queried score."""


class RenormalizationWarning(UserWarning):
    pass
