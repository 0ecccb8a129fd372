"""Exception hierarchy shared by all qmetric modules.

Exit codes used by the CLI: 0 ok, 2 precondition violated, 3 resource cap
exceeded, 4 internal numerical failure.
"""


class QMetricError(Exception):
    exit_code = 1


class PreconditionError(QMetricError):
    """An operation was called with arguments violating its contract."""

    exit_code = 2


class ResourceLimitError(QMetricError):
    """A configured cap (matrix size, enumeration count, cardinality) was hit."""

    exit_code = 3


class NumericalError(QMetricError):
    """A numerical routine failed to reach its accuracy target."""

    exit_code = 4
