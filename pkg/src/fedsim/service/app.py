"""HTTP front end for the simulator.

POST /experiments runs a full experiment synchronously and returns the
report bundle; the CLI can write the same artifact files from that
response that a local run would produce.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ExperimentConfig
from ..errors import ConfigError, FedsimError
from ..runner import run_experiment
from .schemas import ErrorResponse, HealthResponse, RunResponse


def create_app() -> FastAPI:
    app = FastAPI(
        title="fedsim",
        version=__version__,
        description="Deterministic federated-learning simulation service",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/config/defaults", response_model=ExperimentConfig)
    def config_defaults() -> ExperimentConfig:
        return ExperimentConfig()

    @app.post(
        "/experiments",
        response_model=RunResponse,
        responses={400: {"model": ErrorResponse}, 500: {"model": ErrorResponse}},
    )
    def run(config: ExperimentConfig) -> RunResponse:
        try:
            bundle = run_experiment(config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except FedsimError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return RunResponse(**bundle)

    return app


app = create_app()
