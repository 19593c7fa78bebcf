"""Exception types shared across the package.

The CLI maps InputError to exit code 1 and ConsistencyError to exit code 2.
"""


class InputError(ValueError):
    """Bad user input: malformed files, invalid parameters, degenerate data."""


class ConsistencyError(RuntimeError):
    """An internal invariant was violated (e.g. the solver objective increased)."""
