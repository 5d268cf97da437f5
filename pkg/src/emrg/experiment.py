"""Paired baseline-vs-scaled experiment runner.

Both arms of a comparison run inside one invocation with the same seeds, so
every contrast is paired.  A NaN/Inf divergence is a reported outcome, not a
crash; the summary identifies the offending (seed, arm).
"""

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .dataio import ExperimentRecord, epoch_log_to_dict, gen_blobs
from .errors import ParseError
from .graphs import LayeredShape
from .scaling import InitConfig, init_weights
from .trainer import MLPModel, TrainConfig, evaluate_epoch, train_epoch

ARMS = ("base", "scaled")


@dataclass
class ExperimentConfig:
    layers: list
    seeds: list
    epochs: int = 3
    alpha: float = 2.0
    base_scheme: str = "kaiming_normal"
    lr: float = 0.001
    batch_size: int = 128
    active_threshold: float = 0.01
    use_batchnorm: bool = False
    activation: str = "relu"
    dataset: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise ParseError("experiment config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ParseError(f"unknown experiment fields: {sorted(unknown)}")
        for key in ("layers", "seeds"):
            if key not in obj:
                raise ParseError(f"missing required field {key!r}")
        cfg = cls(**obj)
        LayeredShape(cfg.layers)  # validates widths
        if not cfg.seeds:
            raise ParseError("field 'seeds' must be nonempty")
        if cfg.epochs < 0:
            raise ParseError("field 'epochs' must be >= 0")
        return cfg


def make_dataset(spec, default_seed=0):
    """Materialize the dataset described by an experiment config."""
    spec = dict(spec or {})
    kind = spec.pop("type", "blobs")
    if kind == "blobs":
        return gen_blobs(
            classes=spec.get("classes", 3),
            per_class=spec.get("per_class", 1000),
            dim=spec.get("dim", 2),
            spread=spec.get("spread", 0.3),
            seed=spec.get("seed", default_seed),
        )
    raise ParseError(f"unknown dataset type {kind!r}")


def dataset_id(spec):
    spec = dict(spec or {})
    kind = spec.pop("type", "blobs")
    detail = ",".join(f"{k}={spec[k]}" for k in sorted(spec))
    return f"{kind}({detail})"


@dataclass
class RunResult:
    record: ExperimentRecord
    diverged: bool = False
    diverged_epoch: int | None = None


def _is_finite_log(log):
    values = [log.train_loss, log.train_accuracy]
    if log.test_accuracy is not None:
        values.append(log.test_accuracy)
    return all(math.isfinite(v) for v in values)


def run_single(shape, dataset, seed, arm, config, test_dataset=None):
    """Train one arm for one seed; returns a RunResult with all epoch logs."""
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    init = InitConfig(
        base_scheme=config.base_scheme,
        alpha=config.alpha if arm == "scaled" else 1.0,
        seed=seed,
    )
    weights, _ = init_weights(shape, init)
    model = MLPModel(
        weights=weights,
        use_batchnorm=config.use_batchnorm,
        activation=config.activation,
    )
    train_cfg = TrainConfig(
        lr=config.lr,
        batch_size=config.batch_size,
        epochs=config.epochs,
        seed=seed,
        active_threshold=config.active_threshold,
    )
    record = ExperimentRecord(
        seed=seed,
        arm=arm,
        shape=list(shape),
        dataset_id=dataset_id(config.dataset),
        alpha=init.alpha,
        base_scheme=config.base_scheme,
        lr=config.lr,
        batch_size=config.batch_size,
        epochs=config.epochs,
        active_threshold=config.active_threshold,
        use_batchnorm=config.use_batchnorm,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    init_log = evaluate_epoch(model, dataset, train_cfg, test_dataset, epoch=0)
    record.logs.append(epoch_log_to_dict(init_log))
    result = RunResult(record=record)
    for epoch in range(1, config.epochs + 1):
        model, log = train_epoch(model, dataset, train_cfg, test_dataset, epoch)
        record.logs.append(epoch_log_to_dict(log))
        if not _is_finite_log(log):
            result.diverged = True
            result.diverged_epoch = epoch
            break
    return result


def run_experiment(config, test_dataset=None):
    """All (seed, arm) runs in deterministic order; returns list of RunResult."""
    dataset = make_dataset(config.dataset)
    shape = LayeredShape(config.layers)
    results = []
    for seed in sorted(config.seeds):
        for arm in ARMS:
            results.append(
                run_single(shape, dataset, seed, arm, config, test_dataset)
            )
    return results


def summary_rows(results):
    """Per-run summary: init emergence plus epoch-1 loss/accuracy."""
    rows = []
    for res in results:
        logs = res.record.logs
        epoch1 = logs[1] if len(logs) > 1 else None
        rows.append(
            {
                "seed": res.record.seed,
                "arm": res.record.arm,
                "alpha": res.record.alpha,
                "init_emergence": logs[0]["emergence"],
                "epoch1_loss": epoch1["train_loss"] if epoch1 else None,
                "epoch1_accuracy": epoch1["train_accuracy"] if epoch1 else None,
                "diverged": res.diverged,
                "diverged_epoch": res.diverged_epoch,
            }
        )
    return rows
