"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so keep the split stable:
parse problems, encoder/constraint validation failures, size-cap refusals,
and solver failures are different kinds of bad news.
"""


class StuffboundError(Exception):
    """Base class for all toolkit errors."""


class ParseError(StuffboundError):
    """A definition file or inline source could not be parsed."""


class ValidationError(StuffboundError):
    """An encoder or input failed its validity checks."""


class DegenerateGeometryError(StuffboundError):
    """The LP window geometry is unusable (invalid or without variables)."""


class SizeCapError(StuffboundError):
    """A requested computation exceeds the configured size caps."""


class SolverError(StuffboundError):
    """The LP solver could not certify a solution."""


class CorruptArrayError(StuffboundError):
    """An array handed to the decoder is inconsistent with the encoder."""
