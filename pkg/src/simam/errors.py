"""Exception hierarchy shared by every module."""


class SimamError(Exception):
    """Base class for all package errors."""


class DomainError(SimamError, ValueError):
    """An argument lies outside the operation's domain."""


class DegenerateDirection(SimamError, ArithmeticError):
    """Hard thresholding produced the zero vector, so it cannot be normalized."""


class InitDegenerate(DegenerateDirection):
    """The moment initializer is zero (e.g. a constant target column)."""


class IngestError(SimamError, ValueError):
    """A non-finite or unparsable entry in an input series."""

    def __init__(self, row, col, message=None):
        self.row = row
        self.col = col
        super().__init__(message or f"non-finite entry at row {row}, column {col}")


class SizeError(SimamError, ValueError):
    """The series is too short (or the shapes disagree)."""


class ConfigError(SimamError, ValueError):
    """Invalid node configuration."""


class FitError(SimamError):
    """One or more nodes could not be fitted."""

    def __init__(self, nodes, causes=None):
        self.nodes = list(nodes)
        self.causes = dict(causes or {})
        super().__init__(f"fit failed for node(s) {self.nodes}")


class FoldError(SimamError, ValueError):
    """Cross-validation folds are invalid or too small."""


class DegenerateTest(SimamError, ArithmeticError):
    """Paired differences have zero spread; the t statistic is undefined."""


class ConditioningWarning(UserWarning):
    """Least-squares system is numerically rank deficient."""


class SchemaError(SimamError, ValueError):
    """A model/report file does not match the expected schema."""
