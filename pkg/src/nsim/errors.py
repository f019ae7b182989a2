"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` plus the exit status
the CLI maps it to, so failures can be dispatched without string matching.
"""


class NsimError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 1


class UsageError(NsimError):
    """Invalid parameters or configuration; nothing was computed."""

    code = "usage"
    exit_status = 1


class DataError(NsimError, ValueError):
    """Malformed, inconsistent, or degenerate input data."""

    code = "data"
    exit_status = 2


class InfeasibleFitError(NsimError):
    """A fit cannot proceed, e.g. an undersized level set or a degenerate
    regression direction."""

    code = "infeasible-fit"
    exit_status = 3
