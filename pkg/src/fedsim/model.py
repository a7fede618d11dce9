"""From-scratch multilayer perceptron: forward pass, loss, backprop, optimizers.

Parameters live in a single flat float64 vector so client/server exchange
and aggregation operate on plain arrays.  The flattening order is fixed:
layer by layer, the (out x in) weight matrix in row-major order, then that
layer's bias vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ShapeError
from .rng import BATCH, INIT, SeedTree

PROB_FLOOR = 1e-12  # clamp for log() on saturated softmax outputs

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MlpArchitecture:
    """Layer widths [D, hidden..., C] with ReLU or tanh hidden activations."""

    layer_sizes: tuple[int, ...]
    hidden_activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ShapeError("architecture needs an input and an output layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ShapeError("layer sizes must be positive")
        if self.hidden_activation not in ("relu", "tanh"):
            raise ShapeError(f"unknown hidden activation {self.hidden_activation!r}")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    def param_count(self) -> int:
        sizes = self.layer_sizes
        return sum(sizes[l] * sizes[l + 1] + sizes[l + 1] for l in range(len(sizes) - 1))


def init_params(arch: MlpArchitecture, seed: int) -> np.ndarray:
    """Glorot-uniform weights (range +-sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = SeedTree(seed).generator(INIT)
    chunks = []
    sizes = arch.layer_sizes
    for l in range(len(sizes) - 1):
        fan_in, fan_out = sizes[l], sizes[l + 1]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        chunks.append(weights.ravel())
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def unflatten(arch: MlpArchitecture, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat parameter vector into per-layer (weights, bias) views."""
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (arch.param_count(),):
        raise ShapeError(
            f"parameter vector has length {params.shape}, architecture needs {arch.param_count()}"
        )
    layers = []
    offset = 0
    sizes = arch.layer_sizes
    for l in range(len(sizes) - 1):
        fan_in, fan_out = sizes[l], sizes[l + 1]
        weights = params[offset : offset + fan_out * fan_in].reshape(fan_out, fan_in)
        offset += fan_out * fan_in
        bias = params[offset : offset + fan_out]
        offset += fan_out
        layers.append((weights, bias))
    return layers


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Inverse of unflatten."""
    chunks = []
    for weights, bias in layers:
        chunks.append(np.asarray(weights, dtype=np.float64).ravel())
        chunks.append(np.asarray(bias, dtype=np.float64).ravel())
    return np.concatenate(chunks)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _forward_cached(
    arch: MlpArchitecture, params: np.ndarray, batch: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Run the network keeping pre- and post-activation values for backprop."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != arch.input_dim:
        raise ShapeError(
            f"batch must be B x {arch.input_dim}, got {batch.shape}"
        )
    layers = unflatten(arch, params)
    activations = [batch]
    pre_activations = []
    out = batch
    for l, (weights, bias) in enumerate(layers):
        z = out @ weights.T + bias
        pre_activations.append(z)
        if l < len(layers) - 1:
            out = np.maximum(z, 0.0) if arch.hidden_activation == "relu" else np.tanh(z)
            activations.append(out)
        else:
            out = _softmax(z)
    return out, activations, pre_activations


def forward(arch: MlpArchitecture, params: np.ndarray, batch: np.ndarray) -> np.ndarray:
    """Class probabilities for each row of `batch`; rows sum to one."""
    probs, _, _ = _forward_cached(arch, params, batch)
    return probs


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true labels.

    Probabilities are clamped below at PROB_FLOOR before the log, so a
    fully saturated wrong prediction yields a large finite loss rather
    than infinity.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())


def _loss_grad_probs(
    arch: MlpArchitecture, params: np.ndarray, batch: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss, exact parameter gradient (mean-reduced), and the batch probabilities."""
    labels = np.asarray(labels, dtype=np.int64)
    probs, activations, pre_activations = _forward_cached(arch, params, batch)
    loss = cross_entropy(probs, labels)
    layers = unflatten(arch, params)
    batch_size = batch.shape[0]

    # softmax + cross-entropy collapses to (p - onehot) / B at the output
    delta = probs.copy()
    delta[np.arange(batch_size), labels] -= 1.0
    delta /= batch_size

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(layers)  # type: ignore[list-item]
    for l in range(len(layers) - 1, -1, -1):
        weights, _ = layers[l]
        grads[l] = (delta.T @ activations[l], delta.sum(axis=0))
        if l > 0:
            delta = delta @ weights
            if arch.hidden_activation == "relu":
                delta = delta * (pre_activations[l - 1] > 0.0)
            else:
                delta = delta * (1.0 - np.tanh(pre_activations[l - 1]) ** 2)
    return loss, flatten(grads), probs


def backward(
    arch: MlpArchitecture, params: np.ndarray, batch: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Loss and its exact gradient with respect to the flat parameter vector."""
    loss, grad, _ = _loss_grad_probs(arch, params, batch, labels)
    return loss, grad


@dataclass(frozen=True)
class OptimizerState:
    """SGD or Adam state; Adam keeps first/second moments and a step counter."""

    kind: str
    learning_rate: float
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def create(cls, kind: str, learning_rate: float, param_count: int) -> "OptimizerState":
        if kind not in ("sgd", "adam"):
            raise ShapeError(f"unknown optimizer {kind!r}")
        if learning_rate <= 0:
            raise ShapeError("learning rate must be positive")
        if kind == "adam":
            return cls("adam", learning_rate, np.zeros(param_count), np.zeros(param_count), 0)
        return cls("sgd", learning_rate)


def sgd_step(state: OptimizerState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Plain gradient step: params - learning_rate * grad."""
    return params - state.learning_rate * grad


def adam_step(
    state: OptimizerState, params: np.ndarray, grad: np.ndarray
) -> tuple[np.ndarray, OptimizerState]:
    """One bias-corrected Adam update; returns new params and advanced state."""
    if state.kind != "adam" or state.m is None or state.v is None:
        raise ShapeError("adam_step requires Adam optimizer state")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, m=m, v=v, t=t)


@dataclass(frozen=True)
class LocalTrainConfig:
    """Knobs for one train_local call.

    `proximal_mu` > 0 adds mu * (params - anchor_params) to every step's
    gradient, pulling the local model toward the round's global parameters.
    `epoch_offset` numbers this call's epochs inside the experiment-wide
    schedule so mini-batch shuffles continue seamlessly across rounds.
    """

    epochs: int
    batch_size: int
    optimizer: str = "sgd"
    learning_rate: float = 0.1
    proximal_mu: float = 0.0
    anchor_params: np.ndarray | None = None
    epoch_offset: int = 0


@dataclass(frozen=True)
class LocalMetrics:
    """Mean training loss and accuracy over the final epoch."""

    train_loss: float
    train_accuracy: float


def train_local(
    arch: MlpArchitecture,
    start_params: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    cfg: LocalTrainConfig,
    tree: SeedTree,
    client_id: int = 0,
) -> tuple[np.ndarray, LocalMetrics]:
    """Run seeded mini-batch training from `start_params` on one data shard.

    Each epoch shuffles the shard with a stream keyed by
    (seed, client_id, epoch_offset + epoch); batch membership is random but
    samples inside a batch stay in ascending index order, so a full batch
    is processed exactly like the unshuffled shard.

    Returns:
        Final parameters plus mean loss/accuracy over the final epoch
        (measured on each batch before its update, as trained).
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    if n == 0:
        raise ShapeError("train_local needs a non-empty dataset")
    if cfg.epochs < 1:
        raise ShapeError("train_local needs at least one epoch")
    if cfg.proximal_mu < 0:
        raise ShapeError("proximal_mu must be non-negative")
    if cfg.proximal_mu > 0 and cfg.anchor_params is None:
        raise ShapeError("proximal term requires anchor_params")
    batch_size = min(cfg.batch_size, n)

    params = np.array(start_params, dtype=np.float64)
    state = OptimizerState.create(cfg.optimizer, cfg.learning_rate, arch.param_count())
    loss_sum = 0.0
    correct = 0

    for epoch in range(cfg.epochs):
        rng = tree.generator(BATCH, client_id, cfg.epoch_offset + epoch)
        order = rng.permutation(n)
        final_epoch = epoch == cfg.epochs - 1
        for start in range(0, n, batch_size):
            batch_idx = np.sort(order[start : start + batch_size])
            loss, grad, probs = _loss_grad_probs(
                arch, params, features[batch_idx], labels[batch_idx]
            )
            if cfg.proximal_mu > 0:
                grad = grad + cfg.proximal_mu * (params - cfg.anchor_params)
            if final_epoch:
                loss_sum += loss * len(batch_idx)
                correct += int((probs.argmax(axis=1) == labels[batch_idx]).sum())
            if state.kind == "adam":
                params, state = adam_step(state, params, grad)
            else:
                params = sgd_step(state, params, grad)

    return params, LocalMetrics(train_loss=loss_sum / n, train_accuracy=correct / n)


def evaluate(
    arch: MlpArchitecture, params: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> tuple[float, float]:
    """Loss and accuracy of `params` on a held-out set."""
    labels = np.asarray(labels, dtype=np.int64)
    probs = forward(arch, params, features)
    loss = cross_entropy(probs, labels)
    accuracy = float((probs.argmax(axis=1) == labels).mean())
    return loss, accuracy
