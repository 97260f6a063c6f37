"""Exception types shared across the engine."""


class DrillstreamError(Exception):
    """Base class for all engine errors."""


class EmptyText(DrillstreamError):
    """Message text is empty."""


class Overlength(DrillstreamError):
    """Message text exceeds the 140-character limit."""


class ParseError(DrillstreamError):
    """Template source could not be parsed. Carries the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExpansionOverlength(DrillstreamError):
    """A template variant renders outside the 1-140 character range."""

    def __init__(self, message: str, option_indices: tuple):
        super().__init__(f"{message} (option indices {option_indices})")
        self.option_indices = tuple(option_indices)


class MonotonicityError(DrillstreamError):
    """An observation arrived too far behind the window's current time."""


class ConfigurationError(DrillstreamError):
    """Invalid configuration (empty pools, bad policy values, bad files)."""


class CompileError(DrillstreamError):
    """Schedule compilation failed (unresolved refs, constraint misses)."""


class AuthError(DrillstreamError):
    """Missing or invalid session token."""


class Forbidden(DrillstreamError):
    """The session's account kind does not permit this operation."""


class NotFound(DrillstreamError):
    """Referenced message or account does not exist."""


class AlreadyRunning(DrillstreamError):
    """A replay is already in progress on this runtime."""
