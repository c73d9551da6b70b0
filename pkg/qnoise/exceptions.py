"""Error types raised across the simulator and reported by the CLI."""
from typing import Any, Dict, Optional


class QNoiseError(Exception):
    """Base error; carries an optional ``details`` mapping for structured reports."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.message,
            'type': type(self).__name__,
            'details': self.details,
        }


class InvalidArgumentError(QNoiseError, ValueError):
    pass


class UnsupportedDimensionError(InvalidArgumentError):
    pass


class ConfigError(QNoiseError):
    """Malformed or unknown run-configuration entry."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        details = {}
        if key is not None:
            details['key'] = key
        if line is not None:
            details['line'] = line
        super().__init__(message, details)
        self.key = key
        self.line = line


class SimulationError(QNoiseError):
    """Internal numerical failure (should not occur for valid inputs)."""
