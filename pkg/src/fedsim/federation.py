"""Client/server round protocol, aggregation strategies, and experiment loops.

One round samples a fraction of clients, simulates failures, trains each
survivor locally from the current global parameters, and aggregates the
returned parameter vectors with the configured strategy (weighted average,
coordinate-wise median, proximal-regularized average, or a server-side
momentum step).  The centralized baseline trains the same model on the
undivided training set.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .data import Dataset, Partition
from .errors import AggregationError, ConfigError, RoundFailureError
from .metrics import ConfusionMatrix, RocCurve, confusion_matrix, roc_curve_set
from .model import (
    LocalMetrics,
    LocalTrainConfig,
    MlpArchitecture,
    evaluate,
    forward,
    init_params,
    train_local,
)
from .rng import FAILURE, SAMPLE, SeedTree

RULES = ("fedavg", "fedmedian", "fedprox", "fedopt")


@dataclass(frozen=True)
class StrategyConfig:
    """Aggregation rule plus the round-protocol knobs.

    `proximal_mu` only matters for fedprox; `server_learning_rate` and
    `server_momentum` only for fedopt.
    """

    rule: str = "fedavg"
    proximal_mu: float = 0.0
    server_learning_rate: float = 1.0
    server_momentum: float = 0.9
    fraction_fit: float = 1.0
    min_fit_clients: int = 1
    accept_failures: bool = True
    failure_probability: float = 0.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"unknown aggregation rule {self.rule!r}")
        if self.proximal_mu < 0:
            raise ConfigError("proximal_mu must be non-negative")
        if self.server_learning_rate <= 0:
            raise ConfigError("server_learning_rate must be positive")
        if not 0.0 <= self.server_momentum < 1.0:
            raise ConfigError("server_momentum must lie in [0, 1)")
        if not 0.0 < self.fraction_fit <= 1.0:
            raise ConfigError("fraction_fit must lie in (0, 1]")
        if self.min_fit_clients < 1:
            raise ConfigError("min_fit_clients must be at least 1")
        if not 0.0 <= self.failure_probability < 1.0:
            raise ConfigError("failure_probability must lie in [0, 1)")


@dataclass(frozen=True)
class ClientState:
    """One simulated data holder: its shard and its assigned learning rate."""

    id: int
    features: np.ndarray
    labels: np.ndarray
    learning_rate: float

    @property
    def sample_count(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class ServerState:
    """Global parameters, fedopt momentum buffer, and the round counter."""

    params: np.ndarray
    momentum: np.ndarray | None
    round_index: int = 0


@dataclass(frozen=True)
class ClientRoundMetrics:
    client_id: int
    train_loss: float
    train_accuracy: float
    sample_count: int


@dataclass(frozen=True)
class RoundReport:
    """Everything observable about one round."""

    round_index: int
    rule: str
    sampled_ids: tuple[int, ...]
    participant_ids: tuple[int, ...]
    failed_ids: tuple[int, ...]
    skipped: bool
    client_metrics: tuple[ClientRoundMetrics, ...]
    test_loss: float
    test_accuracy: float
    client_eval: tuple[tuple[int, float, float], ...] | None = None


@dataclass(frozen=True)
class ExperimentResult:
    """Final report of one training run (federated rounds or centralized)."""

    mode: str
    rounds: tuple[RoundReport, ...]
    final_train_loss: float
    final_train_accuracy: float
    final_test_loss: float
    final_test_accuracy: float
    confusion: ConfusionMatrix
    curves: tuple[RocCurve, ...]
    wall_time_seconds: float


def assign_learning_rates(clients: int, base_rate: float, factor: float) -> list[float]:
    """Two-group rate schedule: first floor(K/2) clients keep the base rate,
    the remainder get factor * base rate."""
    if clients < 1:
        raise ConfigError("need at least one client")
    half = clients // 2
    return [base_rate if k < half else factor * base_rate for k in range(clients)]


def sample_clients(
    clients: int, fraction_fit: float, min_fit_clients: int, rng: np.random.Generator
) -> list[int]:
    """Uniform subset of client ids, size max(min_fit_clients, ceil(fraction * K))."""
    size = max(min_fit_clients, math.ceil(fraction_fit * clients))
    if size > clients:
        raise ConfigError(
            f"round needs {size} clients but only {clients} exist"
        )
    chosen = rng.choice(clients, size=size, replace=False)
    return sorted(int(c) for c in chosen)


def simulate_failures(
    sampled: Sequence[int], failure_probability: float, rng: np.random.Generator
) -> tuple[list[int], list[int]]:
    """Independent Bernoulli failure per sampled client; returns (survivors, failed)."""
    survivors: list[int] = []
    failed: list[int] = []
    for client_id in sorted(sampled):
        if rng.random() < failure_probability:
            failed.append(client_id)
        else:
            survivors.append(client_id)
    return survivors, failed


def _canonical_order(stacked: np.ndarray, weights: np.ndarray) -> list[int]:
    # total order on (weight, vector bytes) so aggregation is exactly
    # permutation invariant despite floating-point summation
    return sorted(range(len(weights)), key=lambda k: (weights[k], stacked[k].tobytes()))


def aggregate_fedavg(updates: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    """Weighted average of parameter vectors, weights proportional to shard sizes.

    Accumulation is anchored on one update (result = anchor + sum of
    weighted differences), which makes a single update, or identical
    updates, reproduce their value bit-for-bit.
    """
    if not updates:
        raise AggregationError("no updates to aggregate")
    stacked = np.stack([np.asarray(vec, dtype=np.float64) for vec, _ in updates])
    weights = np.array([float(w) for _, w in updates])
    if (weights <= 0).any():
        raise AggregationError("update weights must be positive")
    order = _canonical_order(stacked, weights)
    stacked = stacked[order]
    shares = weights[order] / weights.sum()
    result = stacked[0].copy()
    for k in range(1, len(shares)):
        result += shares[k] * (stacked[k] - stacked[0])
    return result


def aggregate_fedmedian(updates: Sequence[np.ndarray]) -> np.ndarray:
    """Coordinate-wise median; an even count averages the two middle values."""
    if len(updates) == 0:
        raise AggregationError("no updates to aggregate")
    stacked = np.stack([np.asarray(vec, dtype=np.float64) for vec in updates])
    ordered = np.sort(stacked, axis=0)
    count = len(updates)
    mid = count // 2
    if count % 2 == 1:
        return ordered[mid].copy()
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def server_fedopt_step(
    state: ServerState,
    updates: Sequence[tuple[np.ndarray, float]],
    server_learning_rate: float,
    server_momentum: float,
) -> ServerState:
    """Momentum step on the pseudo-gradient (current params minus the FedAvg point).

    v' = momentum * v + (1 - momentum) * g, params' = params - lr * v'.
    """
    momentum = state.momentum if state.momentum is not None else np.zeros_like(state.params)
    pseudo_gradient = state.params - aggregate_fedavg(updates)
    new_momentum = server_momentum * momentum + (1.0 - server_momentum) * pseudo_gradient
    new_params = state.params - server_learning_rate * new_momentum
    return replace(state, params=new_params, momentum=new_momentum)


def _aggregate(
    server: ServerState,
    strategy: StrategyConfig,
    updates: list[tuple[np.ndarray, float]],
) -> ServerState:
    if strategy.rule in ("fedavg", "fedprox"):
        return replace(server, params=aggregate_fedavg(updates))
    if strategy.rule == "fedmedian":
        return replace(server, params=aggregate_fedmedian([vec for vec, _ in updates]))
    return server_fedopt_step(
        server, updates, strategy.server_learning_rate, strategy.server_momentum
    )


def run_round(
    server: ServerState,
    clients: Sequence[ClientState],
    strategy: StrategyConfig,
    arch: MlpArchitecture,
    local_epochs: int,
    batch_size: int,
    optimizer: str,
    test: Dataset,
    tree: SeedTree,
    evaluate_on_clients: bool = False,
) -> tuple[ServerState, RoundReport]:
    """One communication round: sample, fail, train survivors, aggregate, evaluate.

    When fewer survivors than min_fit_clients remain and failures are
    accepted, the round is skipped and the global parameters carry over
    unchanged.  A failure with accept_failures off raises
    RoundFailureError naming the failed clients.
    """
    if not clients:
        raise ConfigError("run_round needs at least one client")
    t = server.round_index
    sampled = sample_clients(
        len(clients), strategy.fraction_fit, strategy.min_fit_clients,
        tree.generator(SAMPLE, t),
    )
    survivors, failed = simulate_failures(
        sampled, strategy.failure_probability, tree.generator(FAILURE, t)
    )
    if failed and not strategy.accept_failures:
        raise RoundFailureError(t, failed)

    if len(survivors) < strategy.min_fit_clients:
        test_loss, test_accuracy = evaluate(arch, server.params, test.features, test.labels)
        report = RoundReport(
            round_index=t,
            rule=strategy.rule,
            sampled_ids=tuple(sampled),
            participant_ids=(),
            failed_ids=tuple(failed),
            skipped=True,
            client_metrics=(),
            test_loss=test_loss,
            test_accuracy=test_accuracy,
        )
        return replace(server, round_index=t + 1), report

    updates: list[tuple[np.ndarray, float]] = []
    client_metrics: list[ClientRoundMetrics] = []
    for client_id in survivors:
        client = clients[client_id]
        cfg = LocalTrainConfig(
            epochs=local_epochs,
            batch_size=batch_size,
            optimizer=optimizer,
            learning_rate=client.learning_rate,
            proximal_mu=strategy.proximal_mu if strategy.rule == "fedprox" else 0.0,
            anchor_params=server.params if strategy.rule == "fedprox" else None,
            epoch_offset=t * local_epochs,
        )
        params_k, metrics = train_local(
            arch, server.params, client.features, client.labels, cfg, tree, client_id
        )
        updates.append((params_k, float(client.sample_count)))
        client_metrics.append(
            ClientRoundMetrics(
                client_id=client_id,
                train_loss=metrics.train_loss,
                train_accuracy=metrics.train_accuracy,
                sample_count=client.sample_count,
            )
        )

    new_server = replace(_aggregate(server, strategy, updates), round_index=t + 1)
    test_loss, test_accuracy = evaluate(arch, new_server.params, test.features, test.labels)
    client_eval = None
    if evaluate_on_clients:
        client_eval = tuple(
            (c.id, *evaluate(arch, new_server.params, c.features, c.labels))
            for c in clients
        )
    report = RoundReport(
        round_index=t,
        rule=strategy.rule,
        sampled_ids=tuple(sampled),
        participant_ids=tuple(survivors),
        failed_ids=tuple(failed),
        skipped=False,
        client_metrics=tuple(client_metrics),
        test_loss=test_loss,
        test_accuracy=test_accuracy,
        client_eval=client_eval,
    )
    return new_server, report


def build_clients(
    train: Dataset, partition: Partition, learning_rates: Sequence[float]
) -> list[ClientState]:
    """Materialize per-client shard views (indices ascending) from a partition."""
    if len(learning_rates) != partition.client_count:
        raise ConfigError("one learning rate per client required")
    clients = []
    for k, indices in enumerate(partition.assignments):
        clients.append(
            ClientState(
                id=k,
                features=train.features[indices],
                labels=train.labels[indices],
                learning_rate=float(learning_rates[k]),
            )
        )
    return clients


def _final_evaluation(
    arch: MlpArchitecture, params: np.ndarray, test: Dataset
) -> tuple[float, float, ConfusionMatrix, tuple[RocCurve, ...]]:
    scores = forward(arch, params, test.features)
    test_loss, test_accuracy = evaluate(arch, params, test.features, test.labels)
    confusion = confusion_matrix(scores, test.labels)
    curves = tuple(roc_curve_set(scores, test.labels))
    return test_loss, test_accuracy, confusion, curves


def run_federated(
    arch: MlpArchitecture,
    train: Dataset,
    test: Dataset,
    partition: Partition,
    strategy: StrategyConfig,
    *,
    rounds: int,
    local_epochs: int,
    batch_size: int,
    optimizer: str,
    base_learning_rate: float,
    dynamic_lr_factor: float | None = None,
    evaluate_on_clients: bool = False,
    tree: SeedTree,
) -> tuple[ExperimentResult, ServerState]:
    """Full federated experiment: seeded init, `rounds` rounds, final evaluation.

    The headline train loss/accuracy follow client 0's latest participating
    round (the single-client convention used for summary tables); per-round
    reports carry every participant's metrics.
    """
    started = time.monotonic()
    k = partition.client_count
    if dynamic_lr_factor is not None:
        rates = assign_learning_rates(k, base_learning_rate, dynamic_lr_factor)
    else:
        rates = [base_learning_rate] * k
    clients = build_clients(train, partition, rates)
    params = init_params(arch, tree.seed)
    momentum = np.zeros_like(params) if strategy.rule == "fedopt" else None
    server = ServerState(params=params, momentum=momentum, round_index=0)

    reports: list[RoundReport] = []
    headline = LocalMetrics(train_loss=float("nan"), train_accuracy=float("nan"))
    for _ in range(rounds):
        server, report = run_round(
            server, clients, strategy, arch, local_epochs, batch_size, optimizer,
            test, tree, evaluate_on_clients,
        )
        reports.append(report)
        for cm in report.client_metrics:
            if cm.client_id == 0:
                headline = LocalMetrics(cm.train_loss, cm.train_accuracy)

    test_loss, test_accuracy, confusion, curves = _final_evaluation(arch, server.params, test)
    result = ExperimentResult(
        mode="federated",
        rounds=tuple(reports),
        final_train_loss=headline.train_loss,
        final_train_accuracy=headline.train_accuracy,
        final_test_loss=test_loss,
        final_test_accuracy=test_accuracy,
        confusion=confusion,
        curves=curves,
        wall_time_seconds=time.monotonic() - started,
    )
    return result, server


def run_centralized(
    arch: MlpArchitecture,
    train: Dataset,
    test: Dataset,
    *,
    epochs: int,
    batch_size: int,
    optimizer: str,
    learning_rate: float,
    tree: SeedTree,
) -> tuple[ExperimentResult, np.ndarray]:
    """Baseline: one model trained on the whole training set, same evaluation."""
    started = time.monotonic()
    params = init_params(arch, tree.seed)
    if epochs > 0:
        cfg = LocalTrainConfig(
            epochs=epochs,
            batch_size=batch_size,
            optimizer=optimizer,
            learning_rate=learning_rate,
        )
        params, metrics = train_local(
            arch, params, train.features, train.labels, cfg, tree, client_id=0
        )
        train_loss, train_accuracy = metrics.train_loss, metrics.train_accuracy
    else:
        train_loss, train_accuracy = evaluate(arch, params, train.features, train.labels)

    test_loss, test_accuracy, confusion, curves = _final_evaluation(arch, params, test)
    record = RoundReport(
        round_index=0,
        rule="centralized",
        sampled_ids=(0,),
        participant_ids=(0,),
        failed_ids=(),
        skipped=False,
        client_metrics=(
            ClientRoundMetrics(0, train_loss, train_accuracy, train.sample_count),
        ),
        test_loss=test_loss,
        test_accuracy=test_accuracy,
    )
    result = ExperimentResult(
        mode="centralized",
        rounds=(record,),
        final_train_loss=train_loss,
        final_train_accuracy=train_accuracy,
        final_test_loss=test_loss,
        final_test_accuracy=test_accuracy,
        confusion=confusion,
        curves=curves,
        wall_time_seconds=time.monotonic() - started,
    )
    return result, params
