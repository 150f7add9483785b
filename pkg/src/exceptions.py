"""
Error hierarchy shared by every stage of the toolkit.

Each error carries the stage that raised it and the CLI exit code it maps to.
"""
from typing import Optional


class CPathError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1
    default_stage: str = "cpath"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage or self.default_stage

    def with_stage(self, stage: str) -> "CPathError":
        self.stage = stage
        return self

    def __str__(self) -> str:
        return f"[{self.stage}] {self.message}"


class ConfigError(CPathError):
    exit_code = 2
    default_stage = "config"


class DataError(CPathError):
    exit_code = 2
    default_stage = "data"


class GraphError(CPathError):
    exit_code = 2
    default_stage = "graph"


class UndefinedCorrelationError(CPathError):
    """Raised when a correlation coefficient has a zero-variance input."""

    exit_code = 2
    default_stage = "metrics"


class ModelError(CPathError):
    exit_code = 3
    default_stage = "model"


class ProtocolError(ModelError):
    default_stage = "bridge"


class UnsupportedOperationError(ModelError):
    pass


class ConvergenceError(CPathError):
    exit_code = 3
    default_stage = "importance"

    def __init__(self, message: str, residual: float, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.residual = residual


class NoCounterfactualsError(CPathError):
    """No counterfactual path was stored, so importance is undefined."""

    exit_code = 4
    default_stage = "importance"
