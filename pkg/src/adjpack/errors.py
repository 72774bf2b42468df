"""Exception types shared across the package."""


class AdjpackError(Exception):
    """Base class for all adjpack errors."""


class ParseError(AdjpackError):
    """Malformed input text (bad edge list line, wrong column count)."""


class DomainError(AdjpackError):
    """Value outside its legal range (vertex id, probability, width)."""


class CapacityError(AdjpackError):
    """Value does not fit the requested width or structure capacity."""


class CodecError(AdjpackError):
    """Corrupt or truncated encoded data."""


class ConfigError(AdjpackError):
    """Incompatible or invalid configuration of schemes/parameters."""
