"""Exception hierarchy.  Every error the CLI maps to exit code 2 derives
from :class:`XkitError`."""


class XkitError(Exception):
    pass


class DuplicatePoint(XkitError):
    pass


class NotT0(XkitError):
    pass


class EmptySpace(XkitError):
    pass


class TooManyPoints(XkitError):
    pass


class UnknownPoint(XkitError):
    pass


class IllFormedMap(XkitError):
    pass


class PathIncoherence(XkitError):
    pass


class SpaceMismatch(XkitError):
    pass


class NotACosheaf(XkitError):
    pass


class NotFlabby(XkitError):
    pass


class LiftFailure(XkitError):
    """Raised when a lift that must exist for flabby input cannot be found.
    Indicates a bug, not bad input."""


class MissingUnit(XkitError):
    pass


class HasSink(XkitError):
    pass


class ConditionKFailure(XkitError):
    pass


class FormatError(XkitError):
    pass
