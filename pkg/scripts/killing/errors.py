"""
Exception hierarchy for the Killing tensor analysis package.
"""

from typing import Optional, Tuple


class KillingAnalysisError(Exception):
    """Base exception for analysis errors"""
    pass


class ExactAlgebraError(KillingAnalysisError):
    """Invalid exact arithmetic, e.g. division by the zero rational function"""
    pass


class ZeroDenominatorError(ExactAlgebraError):
    """A denominator vanishes at the requested evaluation point."""

    def __init__(self, point: Tuple, equation_id: Optional[object] = None, detail: str = ""):
        self.point = point
        self.equation_id = equation_id
        where = f" in equation {equation_id}" if equation_id is not None else ""
        message = f"Zero denominator at point ({point[0]}, {point[1]}){where}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ExpressionParseError(KillingAnalysisError):
    """Syntax error in a rational expression."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class MetricError(KillingAnalysisError):
    """Base exception for metric construction problems"""
    pass


class UnknownMetricError(MetricError):
    """Requested catalog metric does not exist"""
    pass


class MetricFileError(MetricError):
    """Metric file could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class MetricValidationError(MetricError):
    """A metric violates one of its invariants."""

    def __init__(self, check: str, message: str):
        self.check = check
        super().__init__(f"{check}: {message}")


class SingularMetricError(MetricError):
    """Metric determinant vanishes identically"""
    pass


class BranchError(KillingAnalysisError):
    """Parity branch is inconsistent with the metric or the valence"""
    pass


class InternalConsistencyError(KillingAnalysisError):
    """An exact self-check failed. Results of the run must not be trusted."""
    pass


class NonGenericPointError(KillingAnalysisError):
    """Nullities disagree between reference points (raised only on request)"""
    pass
