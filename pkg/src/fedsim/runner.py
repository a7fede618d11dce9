"""Turn a validated ExperimentConfig into a finished report bundle."""

from __future__ import annotations

from typing import Any

from .config import CsvSource, DirichletPartition, ExperimentConfig, FedOptStrategy, FedProxStrategy
from .data import (
    Dataset,
    Partition,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    partition_dirichlet,
    partition_iid,
    split_train_test,
)
from .federation import (
    ExperimentResult,
    StrategyConfig,
    run_centralized,
    run_federated,
)
from .model import MlpArchitecture
from .reporting import build_bundle
from .rng import SeedTree


def build_dataset(config: ExperimentConfig) -> Dataset:
    source = config.dataset
    if isinstance(source, CsvSource):
        return load_csv(source.path, header=source.header)
    spec = SyntheticSpec(
        class_count=source.class_count,
        dims=source.dims,
        samples_per_class=source.samples_per_class,
        center_separation=source.center_separation,
        noise_stddev=source.noise_stddev,
    )
    return generate_synthetic(spec, config.seed)


def build_partition(config: ExperimentConfig, train: Dataset) -> Partition:
    if isinstance(config.partition, DirichletPartition):
        return partition_dirichlet(train, config.clients, config.partition.alpha, config.seed)
    return partition_iid(train, config.clients, config.seed)


def build_strategy(config: ExperimentConfig) -> StrategyConfig:
    scheme = config.strategy
    mu = scheme.mu if isinstance(scheme, FedProxStrategy) else 0.0
    if isinstance(scheme, FedOptStrategy):
        server_lr, server_momentum = scheme.server_learning_rate, scheme.server_momentum
    else:
        server_lr, server_momentum = 1.0, 0.0
    return StrategyConfig(
        rule=scheme.rule,
        proximal_mu=mu,
        server_learning_rate=server_lr,
        server_momentum=server_momentum,
        fraction_fit=config.fraction_fit,
        min_fit_clients=config.min_fit_clients,
        accept_failures=config.accept_failures,
        failure_probability=config.failure_probability,
    )


def run_experiment(config: ExperimentConfig) -> dict[str, Any]:
    """Execute the configured experiment(s) and return the report bundle."""
    tree = SeedTree(config.seed)
    dataset = build_dataset(config)
    train, test = split_train_test(dataset, config.test_fraction, config.seed)
    arch = MlpArchitecture(
        (train.feature_count, *config.hidden_layers, train.class_count),
        hidden_activation=config.hidden_activation,
    )

    results: dict[str, ExperimentResult] = {}
    if config.mode in ("centralized", "both"):
        result, _ = run_centralized(
            arch,
            train,
            test,
            epochs=config.centralized_epochs,
            batch_size=config.batch_size,
            optimizer=config.optimizer,
            learning_rate=config.learning_rate,
            tree=tree,
        )
        results["centralized"] = result
    if config.mode in ("federated", "both"):
        partition = build_partition(config, train)
        result, _ = run_federated(
            arch,
            train,
            test,
            partition,
            build_strategy(config),
            rounds=config.rounds,
            local_epochs=config.epochs,
            batch_size=config.batch_size,
            optimizer=config.optimizer,
            base_learning_rate=config.learning_rate,
            dynamic_lr_factor=config.dynamic_lr_factor,
            evaluate_on_clients=config.evaluate_on_clients,
            tree=tree,
        )
        results["federated"] = result
    return build_bundle(config, results)
