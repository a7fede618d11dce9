"""Experiment configuration: a single strictly-validated JSON document.

Unknown keys are rejected everywhere, range checks name the offending
field, and defaults are applied on load so a config echoed into a report
round-trips to the identical validated object.
"""

from __future__ import annotations

import json
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticSource(_StrictModel):
    """Gaussian-blob dataset; the default desk-scale benchmark."""

    kind: Literal["synthetic"] = "synthetic"
    class_count: int = Field(2, ge=2)
    dims: int = Field(8, ge=1)
    samples_per_class: int = Field(500, ge=2)
    center_separation: float = Field(6.0, ge=0.0)
    noise_stddev: float = Field(1.0, gt=0.0)


class CsvSource(_StrictModel):
    """CSV file with feature columns followed by an integer label column."""

    kind: Literal["csv"] = "csv"
    path: str
    header: bool = False


DatasetSource = Annotated[Union[SyntheticSource, CsvSource], Field(discriminator="kind")]


class IidPartition(_StrictModel):
    kind: Literal["iid"] = "iid"


class DirichletPartition(_StrictModel):
    kind: Literal["dirichlet"] = "dirichlet"
    alpha: float = Field(0.5, gt=0.0)


PartitionScheme = Annotated[Union[IidPartition, DirichletPartition], Field(discriminator="kind")]


class FedAvgStrategy(_StrictModel):
    rule: Literal["fedavg"] = "fedavg"


class FedMedianStrategy(_StrictModel):
    rule: Literal["fedmedian"] = "fedmedian"


class FedProxStrategy(_StrictModel):
    rule: Literal["fedprox"] = "fedprox"
    mu: float = Field(0.01, ge=0.0)


class FedOptStrategy(_StrictModel):
    rule: Literal["fedopt"] = "fedopt"
    server_learning_rate: float = Field(1.0, gt=0.0)
    server_momentum: float = Field(0.9, ge=0.0, lt=1.0)


StrategyScheme = Annotated[
    Union[FedAvgStrategy, FedMedianStrategy, FedProxStrategy, FedOptStrategy],
    Field(discriminator="rule"),
]


class ExperimentConfig(_StrictModel):
    """Everything one run needs; see `fedsim run --help` for the defaults."""

    mode: Literal["centralized", "federated", "both"] = "both"
    dataset: DatasetSource = Field(default_factory=SyntheticSource)
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)

    hidden_layers: list[int] = Field(default_factory=lambda: [16])
    hidden_activation: Literal["relu", "tanh"] = "relu"
    optimizer: Literal["sgd", "adam"] = "sgd"
    learning_rate: float = Field(0.1, gt=0.0)
    batch_size: int = Field(32, ge=1)

    centralized_epochs: int = Field(25, ge=0)
    rounds: int = Field(20, ge=0)
    epochs: int = Field(10, ge=1)
    clients: int = Field(10, ge=1)
    fraction_fit: float = Field(1.0, gt=0.0, le=1.0)
    min_fit_clients: int = Field(1, ge=1)
    accept_failures: bool = True
    failure_probability: float = Field(0.0, ge=0.0, lt=1.0)
    partition: PartitionScheme = Field(default_factory=IidPartition)
    strategy: StrategyScheme = Field(default_factory=FedAvgStrategy)
    dynamic_lr_factor: float | None = Field(None, gt=1.0)
    evaluate_on_clients: bool = False

    seed: int = Field(0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_layers(self) -> "ExperimentConfig":
        if any(h < 1 for h in self.hidden_layers):
            raise ValueError("hidden_layers entries must be positive")
        if self.min_fit_clients > self.clients:
            raise ValueError("min_fit_clients cannot exceed clients")
        return self


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        location = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{location}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw mapping into an ExperimentConfig.

    Raises:
        ConfigError: naming every invalid, missing, or unknown key.
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)
