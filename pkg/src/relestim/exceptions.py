"""Exception types raised by the estimation and data-ingestion layers."""


class EstimationError(Exception):
    """Base class for numerical failures during fitting."""


class DegenerateScale(EstimationError):
    """Residual spread is zero (or too few residuals); no usable scale."""


class RankDeficient(EstimationError):
    """Design matrix (possibly after reweighting) lost full column rank."""


class HullViolation(EstimationError):
    """Zero is not interior to the convex hull of the estimating vectors.

    The inner dual problem has no finite minimizer in this case; callers
    treat the profile log-EL as minus infinity.
    """

    def __init__(self, message, iterations=0, grad_norm=float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.grad_norm = grad_norm


class InfeasibleStart(EstimationError):
    """No feasible starting point was found for the outer EL search."""


class DataError(Exception):
    """Base class for dataset ingestion problems."""


class ParseError(DataError):
    """A cell could not be parsed as a real number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonFiniteValue(DataError):
    """A parsed cell was NaN or infinite."""


class EmptySource(DataError):
    """The tabular source contained no data rows."""
