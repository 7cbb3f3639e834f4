"""
Exception hierarchy

Each error carries the exit code main.py returns for it.
"""

from typing import Optional


class AlphaEtaError(Exception):
    """Base class for simulator errors"""

    exit_code = 1


class ConfigError(AlphaEtaError):
    """Invalid configuration; names the offending field"""

    exit_code = 2

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class ResourceLimitError(AlphaEtaError):
    """A configured resource ceiling would be exceeded"""

    exit_code = 3


class InconsistentObservationError(AlphaEtaError):
    """Every seed key has been eliminated"""


class InvariantViolation(AlphaEtaError):
    """A named invariant failed"""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        self.detail = detail
        super().__init__(f"{name}: {detail}" if detail else name)


class AnalyticDomainError(AlphaEtaError, ValueError):
    """Closed-form estimate evaluated outside its domain"""


class QuadratureError(AlphaEtaError):
    """Numerical integration did not reach the requested tolerance"""

    def __init__(self, message: str, achieved_tolerance: float):
        self.achieved_tolerance = achieved_tolerance
        super().__init__(f"{message} (achieved tolerance {achieved_tolerance:.3g})")


class ResultsParseError(AlphaEtaError):
    """Malformed results file"""

    exit_code = 2

    def __init__(self, path: str, line: Optional[int], message: str):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
