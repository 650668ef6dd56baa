"""Exception hierarchy. Every error carries the CLI exit code for its class:
1 = schema/config problems, 2 = data problems, 3 = numeric problems.
"""


class PctcoefError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(PctcoefError):
    """Invalid run configuration (bad JSON, bad flag combination, bad spec)."""

    exit_code = 1


class SchemaError(PctcoefError):
    """Input data does not match the declared variable specification."""

    exit_code = 1


class AnchorError(PctcoefError):
    """Scale anchors are unusable (max not above min)."""

    exit_code = 1


class NameLookupError(PctcoefError):
    """A referenced variable name is not present in the fitted model."""

    exit_code = 1


class DataError(PctcoefError):
    """Data values violate a policy (forbidden missing cells, empty file, ...)."""

    exit_code = 2


class InsufficientDataError(PctcoefError):
    """Too few rows to fit the requested model."""

    exit_code = 3


class DegenerateVariableError(PctcoefError):
    """A variable carries no usable variation (constant column, zero SD, G < 2)."""

    exit_code = 3


class CollinearityError(PctcoefError):
    """The design matrix is rank deficient."""

    exit_code = 3


class PathologicalDataError(PctcoefError):
    """Bootstrap resampling keeps producing rank-deficient replicates."""

    exit_code = 3


def exit_code_for(exc: BaseException) -> int:
    """CLI exit code for an exception (I/O problems count as data errors)."""
    if isinstance(exc, PctcoefError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return 2
    return 1
