"""Exception types shared across the package.

Every error carries a machine-readable ``code`` so the CLI can map failures
to stable exit statuses: validation problems exit with 2, work-ceiling
refusals with 3.
"""


class FplimitsError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(FplimitsError):
    """Malformed input: dimension mismatch, bad modulus, bad file, ..."""

    code = "validation"


class WorkCeilingExceeded(FplimitsError):
    """A computation was refused because its estimated cost is too large.

    ``estimate`` is the projected number of elementary operations and
    ``ceiling`` the limit it exceeded; optional ``hint`` carries extra data
    such as the parameter value at which the call would succeed.
    """

    code = "work.ceiling"

    def __init__(self, message: str, *, estimate: int | None = None,
                 ceiling: int | None = None, hint=None):
        super().__init__(message)
        self.estimate = estimate
        self.ceiling = ceiling
        self.hint = hint
