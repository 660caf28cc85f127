"""Shared exception types."""


class EstimationError(RuntimeError):
    """A structured estimation failure, such as no pure variables found.

    Carries a ``diagnostics`` dict (for instance the cross-validation trace)
    so callers can report what was tried.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
