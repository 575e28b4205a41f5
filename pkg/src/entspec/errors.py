"""Exception hierarchy shared by all entspec modules."""


class EntspecError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class DimensionMismatch(EntspecError, ValueError):
    pass


class DimensionTooLarge(EntspecError, ValueError):
    pass


class NonHermitian(EntspecError, ValueError):
    pass


class LengthMismatch(EntspecError, ValueError):
    pass


class IndexOutOfRange(EntspecError, IndexError):
    pass


class HamiltonianSyntaxError(EntspecError, ValueError):
    """Malformed DSL program.

    Carries the character offset of the failure and the tokens that would
    have been accepted there.
    """

    def __init__(self, message, position=None, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = message
        if position is not None:
            detail += f" at position {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class SiteOutOfRange(EntspecError, ValueError):
    pass


class DuplicateAxisOnSite(EntspecError, ValueError):
    pass


class UnboundParameter(EntspecError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class TrackedNotEigenstate(EntspecError, ValueError):
    pass
