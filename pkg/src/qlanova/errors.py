"""Exception hierarchy.

Every error carries a short stable ``code`` that the command-line front end
reports alongside the message.
"""


class AnovaError(Exception):
    code = "error"


class DomainError(AnovaError, ValueError):
    """Argument outside the domain of a density, tail or parameter."""

    code = "domain"


class PoleError(DomainError):
    """Density evaluated at a point where it is unbounded (x = 0, df < 2)."""

    code = "pole"


class ConvergenceError(AnovaError, ArithmeticError):
    code = "convergence"


class LayoutError(AnovaError, ValueError):
    """Dataset does not conform to the declared layout."""

    code = "layout"


class DegenerateDataError(AnovaError, ArithmeticError):
    """Residual sum of squares is zero, so the semi-distance is undefined."""

    code = "degenerate"


class HypothesisMismatch(AnovaError, ValueError):
    """State or hypothesis does not match the requested test."""

    code = "hypothesis"


class IngestError(AnovaError, ValueError):
    code = "ingest"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
