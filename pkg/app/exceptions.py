"""
Error types shared by the library, the CLI and the HTTP routers
"""
from typing import Optional


class AttsyncError(Exception):
    """Base error. `reason` is the machine-parseable prefix, `exit_code` the CLI status."""

    reason = "error"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Single-line report used by the CLI"""
        text = " ".join(self.message.split())
        return f"error[{self.reason}]: {text}"


class ConfigError(AttsyncError):
    """Config text could not be parsed or failed validation"""

    reason = "config"

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        if line is not None:
            message = f"line {line}: {message}"
        elif field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field


class GraphValidationError(AttsyncError):
    """Invalid edge list; names the offending edge"""

    reason = "graph"

    def __init__(self, message: str, edge: Optional[tuple] = None):
        if edge is not None:
            message = f"edge {edge}: {message}"
        super().__init__(message)
        self.edge = edge


class QuaternionError(AttsyncError):
    """Non-unit, non-finite or non-canonical quaternion input"""

    reason = "quaternion"


class TransformError(AttsyncError):
    """A constructed coordinate transform violates its postcondition"""

    reason = "transform"
    exit_code = 2


class IntegrationError(AttsyncError):
    """Non-finite state produced by the integrator"""

    reason = "integration"
    exit_code = 2

    def __init__(self, message: str, agent: Optional[int] = None, t: Optional[float] = None):
        if agent is not None:
            message = f"agent {agent}: {message}"
        if t is not None:
            message = f"{message} (t={t:.6g})"
        super().__init__(message)
        self.agent = agent
        self.t = t


class AcceptanceError(AttsyncError):
    """A golden acceptance criterion failed"""

    reason = "acceptance"
    exit_code = 3


class ExportError(AttsyncError):
    """Output file could not be read or written"""

    reason = "io"
