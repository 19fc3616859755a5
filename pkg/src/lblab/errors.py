"""Exception hierarchy. Every error raised on bad input derives from ``LblabError``."""


class LblabError(ValueError):
    pass


class InvalidPiece(LblabError):
    pass


class InvalidFactor(LblabError):
    pass


class UnsupportedExponent(LblabError):
    pass


class ZeroVector(LblabError):
    pass


class InadmissibleSpec(LblabError):
    pass


class InadmissibleDelta(LblabError):
    pass


class PreconditionViolated(LblabError):
    pass


class InvalidPoint(LblabError):
    pass


class NoWitnessFound(RuntimeError):
    """Search exhausted its budget. Signals a rank defect or a bug, never bad luck."""
