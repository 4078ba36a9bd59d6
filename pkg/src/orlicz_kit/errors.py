"""Exception types shared across the package."""


class OrliczKitError(Exception):
    """Base class for all errors raised by orlicz_kit."""


class InputError(OrliczKitError, ValueError):
    """Malformed or out-of-domain input (bad grid, point outside a box, ...)."""


class IntegrityError(OrliczKitError, RuntimeError):
    """An integrand or computation violated a structural axiom it relies on,
    e.g. ``t -> phi(x, t)`` turned out to be decreasing during a bracket search.
    """


class UnsupportedError(OrliczKitError, NotImplementedError):
    """The requested condition or operation is deliberately not supported."""
