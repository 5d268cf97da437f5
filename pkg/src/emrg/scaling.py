"""Base weight initializers and the layer-wise alpha scaling schedule."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidShape, LengthMismatch
from .graphs import LayeredShape

BASE_SCHEMES = ("xavier_uniform", "xavier_normal", "kaiming_normal")


@dataclass
class WeightSet:
    """Per-layer weight matrices (fan_out x fan_in) and bias vectors."""

    matrices: list
    biases: list

    def __post_init__(self):
        if len(self.matrices) != len(self.biases):
            raise LengthMismatch("need one bias vector per weight matrix")
        for l in range(len(self.matrices) - 1):
            if self.matrices[l + 1].shape[1] != self.matrices[l].shape[0]:
                raise LengthMismatch(
                    f"layer {l + 2} fan_in {self.matrices[l + 1].shape[1]} != "
                    f"layer {l + 1} fan_out {self.matrices[l].shape[0]}"
                )
        for l, (w, b) in enumerate(zip(self.matrices, self.biases)):
            if b.shape != (w.shape[0],):
                raise LengthMismatch(f"layer {l + 1} bias length != fan_out")

    @property
    def num_layers(self):
        return len(self.matrices)

    @property
    def shape(self):
        """The LayeredShape this weight set implements."""
        sizes = [self.matrices[0].shape[1]] + [w.shape[0] for w in self.matrices]
        return LayeredShape(sizes)

    def copy(self):
        return WeightSet(
            matrices=[w.copy() for w in self.matrices],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class ScaleSchedule:
    """Per-layer multipliers alpha**e_l with exponents e_l."""

    alpha: float
    exponents: list
    multipliers: list = field(default_factory=list)

    def __post_init__(self):
        if not self.multipliers:
            self.multipliers = [self.alpha**e for e in self.exponents]


@dataclass
class InitConfig:
    """Everything needed to reproduce an initialization."""

    base_scheme: str = "kaiming_normal"
    alpha: float = 2.0
    pivot_mode: str = "auto"  # "auto" or "explicit"
    center: float | None = None  # required for explicit pivot_mode
    seed: int = 0

    def __post_init__(self):
        if self.base_scheme not in BASE_SCHEMES:
            raise DomainError(f"unknown base scheme {self.base_scheme!r}")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.pivot_mode == "explicit" and self.center is None:
            raise DomainError("explicit pivot mode needs a center")


def base_init(shape, scheme="kaiming_normal", seed=0):
    """Draw a WeightSet from a standard variance-preserving scheme.

    xavier_*: Var = 2 / (fan_in + fan_out); kaiming_normal: Var = 2 / fan_in.
    Biases are zero.  Deterministic for a fixed (shape, scheme, seed).
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    if scheme not in BASE_SCHEMES:
        raise DomainError(f"unknown base scheme {scheme!r}")
    if any(n < 1 for n in shape):
        raise InvalidShape("all layer widths must be >= 1")
    rng = np.random.default_rng(seed)
    matrices = []
    biases = []
    for l in range(len(shape) - 1):
        fan_in, fan_out = shape[l], shape[l + 1]
        if scheme == "xavier_uniform":
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        elif scheme == "xavier_normal":
            w = rng.normal(0.0, math.sqrt(2.0 / (fan_in + fan_out)), (fan_out, fan_in))
        else:  # kaiming_normal
            w = rng.normal(0.0, math.sqrt(2.0 / fan_in), (fan_out, fan_in))
        matrices.append(w)
        biases.append(np.zeros(fan_out))
    return WeightSet(matrices=matrices, biases=biases)


def scale_schedule(num_layers, alpha, pivot_mode="auto", center=None):
    """Symmetric geometric multipliers for ``num_layers`` weight matrices.

    Auto mode centers the exponents at (L + 1) / 2 so e_l = l - (L + 1) / 2;
    they sum to zero for every L, which keeps the end-to-end product of the
    multipliers at 1.  Explicit mode shifts the center instead.
    """
    if num_layers < 1:
        raise DomainError("need at least one layer")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if pivot_mode == "auto":
        center = (num_layers + 1) / 2
    elif pivot_mode == "explicit":
        if center is None:
            raise DomainError("explicit pivot mode needs a center")
        if not 1 <= center <= num_layers:
            raise DomainError(f"center {center} outside [1, {num_layers}]")
    else:
        raise DomainError(f"unknown pivot mode {pivot_mode!r}")
    exponents = [l - center for l in range(1, num_layers + 1)]
    return ScaleSchedule(alpha=float(alpha), exponents=exponents)


def apply_emergence_scaling(weights, schedule):
    """Multiply layer l's matrix by schedule.multipliers[l]; biases untouched."""
    if len(schedule.multipliers) != weights.num_layers:
        raise LengthMismatch(
            f"schedule has {len(schedule.multipliers)} entries, "
            f"weights have {weights.num_layers} layers"
        )
    return WeightSet(
        matrices=[m * w for m, w in zip(schedule.multipliers, weights.matrices)],
        biases=[b.copy() for b in weights.biases],
    )


def init_weights(shape, config):
    """base_init followed by the alpha schedule from ``config``."""
    weights = base_init(shape, config.base_scheme, config.seed)
    schedule = scale_schedule(
        weights.num_layers, config.alpha, config.pivot_mode, config.center
    )
    return apply_emergence_scaling(weights, schedule), schedule


def alpha_for_learning_rate(alpha0, eta0, eta, num_layers):
    """Rescale alpha when the learning rate changes: alpha0 * (eta0/eta)**(1/N)."""
    if alpha0 <= 0 or eta0 <= 0 or eta <= 0 or num_layers <= 0:
        raise DomainError("all arguments must be positive")
    return alpha0 * (eta0 / eta) ** (1.0 / num_layers)


def layerwise_learning_rates(grad_sq_norms, base_lr):
    """Rates proportional to 1/sqrt(E[||grad||^2]), normalized to mean base_lr."""
    if base_lr <= 0:
        raise DomainError("base_lr must be positive")
    norms = [float(g) for g in grad_sq_norms]
    if not norms or any(g <= 0 for g in norms):
        raise DomainError("gradient norms must be positive")
    inv = [1.0 / math.sqrt(g) for g in norms]
    mean_inv = sum(inv) / len(inv)
    return [base_lr * v / mean_inv for v in inv]


def recommended_alpha(num_layers, with_batchnorm=False):
    """Heuristic default: 2 in general, 10 for 2-layer blocks or with batchnorm."""
    if num_layers < 1:
        raise DomainError("need at least one layer")
    if num_layers <= 2 or with_batchnorm:
        return 10.0
    return 2.0
