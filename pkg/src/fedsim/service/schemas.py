"""Request/response models for the HTTP service.

The run request body is the ExperimentConfig itself; responses wrap the
report bundle produced by the runner.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel

from ..config import ExperimentConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class RunResponse(BaseModel):
    """Full report bundle: config echo, deterministic results, wall times."""

    config: ExperimentConfig
    results: dict[str, Any]
    timing: dict[str, float]


class ErrorResponse(BaseModel):
    detail: str
