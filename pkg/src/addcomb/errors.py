"""Exception types shared across the package."""


class GroupMismatchError(ValueError):
    """Two objects that must live in the same group do not."""


class NotFoundError(LookupError):
    """A search that is expected to succeed came back empty.

    ``diagnostics`` carries whatever the search recorded on the way
    (branch taken, best value seen, ...).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NeitherCaseError(NotFoundError):
    """The two-scale selection found neither of its two outcomes."""


class VerificationError(RuntimeError):
    """A construction failed its a-posteriori check."""

