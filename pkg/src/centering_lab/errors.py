"""Exception types shared across the package.

The CLI maps these onto exit codes, so library code raises them instead of
bare ``ValueError``.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SchemaError(ValueError):
    """A JSON input document does not match its schema."""


class EigenSolverError(RuntimeError):
    """Eigen-decomposition residuals exceeded the accepted tolerance."""
