"""Minimal deterministic MLP trainer.

Dense layers + ReLU/tanh, optional batch normalization on the hidden layers,
softmax cross-entropy, plain SGD.  Everything runs in float64 and every
logged number is fully determined by (seed, config, dataset): batches are a
seeded permutation and accumulation order is fixed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, ShapeMismatch
from .graphs import ActivationProfile
from .measures import emergence_layered
from .scaling import WeightSet

BN_EPS = 1e-8
BN_MOMENTUM = 0.1


@dataclass
class BatchNormState:
    """Learned scale/shift and running statistics for one hidden layer."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray

    @classmethod
    def identity(cls, width):
        return cls(
            gamma=np.ones(width),
            beta=np.zeros(width),
            running_mean=np.zeros(width),
            running_var=np.ones(width),
        )


@dataclass
class MLPModel:
    weights: WeightSet
    use_batchnorm: bool = False
    activation: str = "relu"
    bn_state: list = field(default_factory=list)

    def __post_init__(self):
        if self.activation not in ("relu", "tanh"):
            raise ShapeMismatch(f"unknown activation {self.activation!r}")
        hidden = self.weights.num_layers - 1
        if self.use_batchnorm and not self.bn_state:
            self.bn_state = [
                BatchNormState.identity(self.weights.matrices[l].shape[0])
                for l in range(hidden)
            ]
        if self.use_batchnorm and len(self.bn_state) != hidden:
            raise LengthMismatch("need one batchnorm state per hidden layer")
        if not self.use_batchnorm and self.bn_state:
            raise ShapeMismatch("bn_state present but use_batchnorm is off")

    def copy(self):
        return MLPModel(
            weights=self.weights.copy(),
            use_batchnorm=self.use_batchnorm,
            activation=self.activation,
            bn_state=[
                BatchNormState(
                    s.gamma.copy(),
                    s.beta.copy(),
                    s.running_mean.copy(),
                    s.running_var.copy(),
                )
                for s in self.bn_state
            ],
        )


@dataclass
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 128
    epochs: int = 1
    seed: int = 0
    active_threshold: float = 0.01

    def __post_init__(self):
        if self.lr < 0 or self.batch_size < 1 or self.epochs < 0:
            raise ShapeMismatch("lr/batch_size/epochs out of range")
        if self.active_threshold < 0:
            raise ShapeMismatch("active_threshold must be >= 0")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    train_accuracy: float
    test_accuracy: float | None
    emergence: int
    profile: ActivationProfile


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _nonlinearity(model, z):
    if model.activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def forward(model, batch, train=True):
    """Run the network; returns (logits, cache).

    The cache keeps, per hidden layer, the affine output, batchnorm
    internals, and the post-nonlinearity activations, plus the layer inputs
    needed for backprop.  Running statistics are NOT updated here; use the
    batch stats stored in the cache (see train_epoch).
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.weights.matrices[0].shape[1]:
        raise ShapeMismatch(
            f"batch shape {batch.shape} incompatible with fan_in "
            f"{model.weights.matrices[0].shape[1]}"
        )
    num_layers = model.weights.num_layers
    x = batch
    cache = {"inputs": [], "affine": [], "bn": [], "hidden": []}
    for l in range(num_layers):
        w, b = model.weights.matrices[l], model.weights.biases[l]
        cache["inputs"].append(x)
        z = x @ w.T + b
        if l == num_layers - 1:
            cache["logits"] = z
            return z, cache
        cache["affine"].append(z)
        if model.use_batchnorm:
            st = model.bn_state[l]
            if train:
                mean = z.mean(axis=0)
                var = z.var(axis=0)
            else:
                mean = st.running_mean
                var = st.running_var
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            x_hat = (z - mean) * inv_std
            z = st.gamma * x_hat + st.beta
            cache["bn"].append(
                {"x_hat": x_hat, "inv_std": inv_std, "mean": mean, "var": var}
            )
        else:
            cache["bn"].append(None)
        x = _nonlinearity(model, z)
        cache["hidden"].append(x)
    raise AssertionError("unreachable")


def loss_and_grads(model, batch, labels, train=True):
    """Mean softmax cross-entropy and gradients for every parameter.

    Returns (loss, grads) with grads = {"W": [...], "b": [...], and, when
    batchnorm is on, "gamma": [...], "beta": [...]}.
    """
    labels = np.asarray(labels, dtype=np.int64)
    logits, cache = forward(model, batch, train=train)
    m, classes = logits.shape
    if labels.shape != (m,) or labels.min(initial=0) < 0 or labels.max(initial=0) >= classes:
        raise ShapeMismatch("labels must be in [0, out_dim) and match the batch")
    probs = softmax(logits)
    loss = float(-np.log(probs[np.arange(m), labels] + 1e-300).mean())

    num_layers = model.weights.num_layers
    grads = {"W": [None] * num_layers, "b": [None] * num_layers}
    if model.use_batchnorm:
        grads["gamma"] = [None] * (num_layers - 1)
        grads["beta"] = [None] * (num_layers - 1)

    dlogits = probs.copy()
    dlogits[np.arange(m), labels] -= 1.0
    dlogits /= m

    dz = dlogits
    for l in range(num_layers - 1, -1, -1):
        x = cache["inputs"][l]
        grads["W"][l] = dz.T @ x
        grads["b"][l] = dz.sum(axis=0)
        if l == 0:
            break
        dx = dz @ model.weights.matrices[l]
        h = cache["hidden"][l - 1]
        if model.activation == "relu":
            dpre = dx * (h > 0.0)
        else:
            dpre = dx * (1.0 - h * h)
        if model.use_batchnorm:
            bn = cache["bn"][l - 1]
            st = model.bn_state[l - 1]
            x_hat, inv_std = bn["x_hat"], bn["inv_std"]
            grads["gamma"][l - 1] = (dpre * x_hat).sum(axis=0)
            grads["beta"][l - 1] = dpre.sum(axis=0)
            if train:
                mb = dpre.shape[0]
                dz = (st.gamma * inv_std / mb) * (
                    mb * dpre
                    - dpre.sum(axis=0)
                    - x_hat * (dpre * x_hat).sum(axis=0)
                )
            else:
                dz = dpre * st.gamma * inv_std
        else:
            dz = dpre
    return loss, grads


def sgd_step(model, grads, lr):
    """In-place theta -= lr * grad; ``lr`` is a scalar or per-layer list."""
    num_layers = model.weights.num_layers
    if np.isscalar(lr):
        rates = [float(lr)] * num_layers
    else:
        rates = [float(r) for r in lr]
        if len(rates) != num_layers:
            raise LengthMismatch(
                f"{len(rates)} learning rates for {num_layers} layers"
            )
    for l in range(num_layers):
        model.weights.matrices[l] -= rates[l] * grads["W"][l]
        model.weights.biases[l] -= rates[l] * grads["b"][l]
        if model.use_batchnorm and l < num_layers - 1:
            model.bn_state[l].gamma -= rates[l] * grads["gamma"][l]
            model.bn_state[l].beta -= rates[l] * grads["beta"][l]
    return model


def _update_running_stats(model, cache):
    for st, bn in zip(model.bn_state, cache["bn"]):
        st.running_mean *= 1.0 - BN_MOMENTUM
        st.running_mean += BN_MOMENTUM * bn["mean"]
        st.running_var *= 1.0 - BN_MOMENTUM
        st.running_var += BN_MOMENTUM * bn["var"]


def predict(model, features):
    logits, _ = forward(model, features, train=False)
    return logits.argmax(axis=1)


def accuracy(model, features, labels):
    """Fraction of correct argmax predictions (eval mode for batchnorm)."""
    logits, _ = forward(model, features, train=False)
    return float((logits.argmax(axis=1) == np.asarray(labels)).mean())


def activation_profile(model, features, threshold):
    """Active-node counts per layer under the mean-|activation| criterion.

    A hidden node is active when its post-nonlinearity activation magnitude,
    averaged over the whole dataset, strictly exceeds ``threshold``.  The
    input layer counts as fully active; the output layer is judged on the
    softmax-input (logit) magnitudes.  Batchnorm layers use dataset batch
    statistics so the profile is deterministic at initialization.
    """
    features = np.asarray(features, dtype=np.float64)
    logits, cache = forward(model, features, train=True)
    counts = [features.shape[1]]
    for h in cache["hidden"]:
        counts.append(int((np.abs(h).mean(axis=0) > threshold).sum()))
    counts.append(int((np.abs(logits).mean(axis=0) > threshold).sum()))
    return ActivationProfile(counts)


def train_epoch(model, dataset, config, test_dataset=None, epoch=0):
    """One seeded full pass over ``dataset``; returns (model, EpochLog).

    The shuffle is a permutation drawn from (config.seed, epoch), batches are
    visited in order, and the epoch loss is the sample-weighted mean of the
    batch losses.
    """
    features = np.asarray(dataset.features, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    n = features.shape[0]
    if n == 0:
        raise ShapeMismatch("dataset is empty")
    rng = np.random.default_rng([config.seed, epoch])
    order = rng.permutation(n)
    total_loss = 0.0
    for start in range(0, n, config.batch_size):
        idx = order[start : start + config.batch_size]
        loss, grads = loss_and_grads(model, features[idx], labels[idx])
        if model.use_batchnorm:
            _, cache = forward(model, features[idx], train=True)
            _update_running_stats(model, cache)
        sgd_step(model, grads, config.lr)
        total_loss += loss * len(idx)
    log = evaluate_epoch(model, dataset, config, test_dataset, epoch)
    log.train_loss = total_loss / n
    return model, log


def evaluate_epoch(model, dataset, config, test_dataset=None, epoch=0):
    """EpochLog for the current model without taking any gradient steps."""
    features = np.asarray(dataset.features, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    loss, _ = loss_and_grads(model, features, labels)
    profile = activation_profile(model, features, config.active_threshold)
    shape = model.weights.shape
    return EpochLog(
        epoch=epoch,
        train_loss=loss,
        train_accuracy=accuracy(model, features, labels),
        test_accuracy=(
            accuracy(model, test_dataset.features, test_dataset.labels)
            if test_dataset is not None
            else None
        ),
        emergence=emergence_layered(shape, profile),
        profile=profile,
    )
