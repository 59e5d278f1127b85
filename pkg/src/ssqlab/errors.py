"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition or invariant.

    The CLI maps this to exit code 2; all other failures exit with 1.
    """
