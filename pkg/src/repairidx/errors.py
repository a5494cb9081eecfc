"""Exception types raised by the library."""


class RepairIndexError(Exception):
    """Base class for all library errors."""


class ConfigurationError(RepairIndexError, ValueError):
    pass


class InvalidSymbolError(RepairIndexError, ValueError):
    pass


class InvariantViolation(RepairIndexError, ValueError):
    pass


class DecodeError(RepairIndexError, ValueError):
    pass


class UnknownTermError(RepairIndexError, KeyError):
    def __init__(self, term):
        super().__init__(term)
        self.term = term

    def __str__(self) -> str:
        return f"unknown term {self.term!r}"


class FormatError(RepairIndexError):
    """Malformed index file. ``section`` names the block that failed."""

    def __init__(self, section: str, message: str):
        super().__init__(f"{section}: {message}")
        self.section = section


class OracleMismatch(RepairIndexError, AssertionError):
    pass
