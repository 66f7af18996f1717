"""
Exception types for rigidpath
"""

from typing import Any, Dict, Optional

# CLI exit codes
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_PARSE_ERROR = 2
EXIT_PIPELINE_ERROR = 3
EXIT_ASSUMPTION_FLAGS = 4


class RigidPathError(Exception):
    """Base class for all rigidpath errors"""


class TrajectoryParseError(RigidPathError):
    """Malformed trajectory or label file"""

    def __init__(self, message: str, line_number: Optional[int] = None, path: Optional[str] = None):
        self.line_number = line_number
        self.path = path
        location = ""
        if path:
            location += f"{path}:"
        if line_number is not None:
            location += f"line {line_number}: "
        elif location:
            location += " "
        super().__init__(f"{location}{message}")


class ConfigError(RigidPathError):
    """Invalid pipeline configuration"""


class BoundsError(RigidPathError, ValueError):
    """Frame window or frame index outside the video"""


class DegenerateConfigurationError(RigidPathError):
    """Point configuration cannot determine a fundamental matrix"""


class ConsistencyError(RigidPathError):
    """Internal invariant violated between pipeline stages"""


class PipelineError(RigidPathError):
    """The pipeline could not produce labels"""


class NoReliableBackgroundError(PipelineError):
    """No trajectory is fully covered by the dominant path"""


class InsufficientBackgroundError(PipelineError):
    """Too few reliable trajectories to fit the global background motion"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
