"""Exception types shared across the package.

The CLI maps these onto its exit codes: ``InputError`` -> 2,
``ResourceError`` -> 3.
"""


class CartanFreeError(Exception):
    pass


class InputError(CartanFreeError, ValueError):
    """Malformed or dimensionally inconsistent input."""


class ResourceError(CartanFreeError, RuntimeError):
    """A computation would exceed a configured limit, or a truncated
    window is too small to give a trustworthy answer."""


class UnsupportedError(CartanFreeError, NotImplementedError):
    """The operation is not defined for this kind of input (e.g. rank > 1)."""
