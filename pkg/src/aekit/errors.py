"""Exception hierarchy shared by every aekit module."""


class AEKitError(Exception):
    """Base class for all errors raised by aekit."""


class InvalidInputError(AEKitError, ValueError):
    """Arguments are malformed: dimension mismatch, off-grid point, unknown player."""


class ParseError(AEKitError, ValueError):
    """A problem/family/SLMFG document does not follow its schema.

    ``where`` holds a JSON path (``players[0].grid``) or a ``line N`` marker.
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(AEKitError, ValueError):
    """A structurally parsed object violates a semantic requirement."""


class ConsistencyError(AEKitError, RuntimeError):
    """An internal invariant failed; the input was corrupted after validation."""


class ImprovementSetMismatch(AEKitError, ValueError):
    """Members of a profile family do not share their improvement sets."""
