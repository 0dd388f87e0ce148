"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, CapacityError -> 2,
SolverError -> 3, I/O and format errors -> 4.
"""


class FormatError(ValueError):
    """Unsupported or malformed image file."""


class CapacityError(RuntimeError):
    """Requested payload exceeds what the channel/plan can carry."""


class SolverError(RuntimeError):
    """Inverse interpolation could not realize an embedding change."""


class KeyMismatchError(ValueError):
    """Extraction parameters do not match the embedded stream."""
