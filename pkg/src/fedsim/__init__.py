"""fedsim: deterministic federated-learning simulation engine."""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config, parse_config
from .runner import run_experiment

__all__ = ["ExperimentConfig", "load_config", "parse_config", "run_experiment", "__version__"]
