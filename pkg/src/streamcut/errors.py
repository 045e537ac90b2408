"""Exception types shared across the package."""


class StreamcutError(Exception):
    """Base class for all package errors."""


class QueryOnUnseenId(StreamcutError, LookupError):
    """A distance query named an ID that has not appeared in the stream.

    Under the distance-oracle model this is a model violation: the algorithm
    fails immediately.
    """

    def __init__(self, point_id):
        super().__init__(f"distance query on unseen or invalid id {point_id!r}")
        self.point_id = point_id


class InstanceTooLarge(StreamcutError, ValueError):
    """Exhaustive enumeration was requested above the configured threshold."""


class EmptyStream(StreamcutError, ValueError):
    """A result was requested before any event was processed."""


class StreamFormatError(StreamcutError, ValueError):
    """Malformed metric or stream file, or an invalid event sequence."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(StreamcutError, ValueError):
    """Invalid parameters for a generator, estimator or coreset."""
