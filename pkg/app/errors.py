"""
Exception types raised by the offloading library.

Everything a caller can fix by changing its input derives from ValueError, so
the HTTP layer and the CLI can treat bad input uniformly.
"""

from typing import Optional


class OffloadingError(Exception):
    """Base class for all library errors"""


class InvalidConfigError(OffloadingError, ValueError):
    """A radio, processing or experiment configuration is unusable"""


class InvalidArgumentError(OffloadingError, ValueError):
    """An operation was called with arguments outside its contract"""


class InvalidSpecError(OffloadingError, ValueError):
    """A workload specification cannot produce tasks"""


class ConfigParseError(OffloadingError, ValueError):
    """An experiment config file could not be parsed"""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        source: Optional[str] = None,
    ):
        self.message = message
        self.field = field
        self.line = line
        self.source = source
        location = ""
        if source:
            location += f"{source}"
        if line is not None:
            location += f":{line}"
        if field:
            location += f" [{field}]"
        super().__init__(f"{location.strip()}: {message}" if location else message)

    def to_dict(self) -> dict:
        return {
            "type": type(self).__name__,
            "message": self.message,
            "field": self.field,
            "line": self.line,
        }
