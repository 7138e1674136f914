"""Pydantic models for configuration and run reporting."""

from structqn_core.models.base import StrictModel, config_error_from
from structqn_core.models.config import (
    DeltaMode,
    InitStrategy,
    MinusInitMode,
    SolverConfig,
    Variant,
    WolfeConfig,
)
from structqn_core.models.report import RunReport, RunStatus, TraceRecord

__all__ = [
    "DeltaMode",
    "InitStrategy",
    "MinusInitMode",
    "RunReport",
    "RunStatus",
    "SolverConfig",
    "StrictModel",
    "TraceRecord",
    "Variant",
    "WolfeConfig",
    "config_error_from",
]
