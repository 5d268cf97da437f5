"""Datasets and every persistent format.

Formats owned here:
  * EMIW binary weight container (magic "EMIW", u32 LE version, float32 data)
  * network spec: JSON text with {"layers": [...]} plus optional "profile"
    and "filters"
  * experiment logs: line-delimited JSON, one record per line, emergence
    values as decimal strings so arbitrary precision survives the round-trip
  * IDX (MNIST) and CIFAR-10 binary readers
"""

import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, IoError, ParseError, VersionError
from .graphs import ActivationProfile, LayeredShape
from .scaling import WeightSet

EMIW_MAGIC = b"EMIW"
EMIW_VERSION = 1

IDX_MAGIC_IMAGES = 0x00000803
IDX_MAGIC_LABELS = 0x00000801


@dataclass
class Dataset:
    features: np.ndarray  # [samples, dim] float64
    labels: np.ndarray  # [samples] int64
    split: str = "train"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ParseError("features and labels disagree on sample count")

    def __len__(self):
        return self.features.shape[0]


def gen_blobs(classes, per_class, dim, spread, seed):
    """Gaussian clusters around seeded random centers; deterministic."""
    if classes < 1 or per_class < 1 or dim < 1 or spread < 0:
        raise ParseError("classes/per_class/dim must be positive, spread >= 0")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(classes, dim))
    features = np.concatenate(
        [centers[c] + spread * rng.normal(size=(per_class, dim)) for c in range(classes)]
    )
    labels = np.repeat(np.arange(classes), per_class)
    return Dataset(features=features, labels=labels)


def _read_file(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def load_idx(images_path, labels_path):
    """Read an IDX image/label file pair (the MNIST container format)."""
    images = _read_file(images_path)
    labels = _read_file(labels_path)

    if len(images) < 16:
        raise FormatError("IDX image file truncated before header", offset=len(images))
    magic, count, rows, cols = struct.unpack(">IIII", images[:16])
    if magic != IDX_MAGIC_IMAGES:
        raise FormatError(f"bad IDX image magic 0x{magic:08x}", offset=0)
    expected = 16 + count * rows * cols
    if len(images) < expected:
        raise FormatError(
            f"IDX image file truncated: need {expected} bytes", offset=len(images)
        )
    pixels = np.frombuffer(images, dtype=np.uint8, count=count * rows * cols, offset=16)

    if len(labels) < 8:
        raise FormatError("IDX label file truncated before header", offset=len(labels))
    lmagic, lcount = struct.unpack(">II", labels[:8])
    if lmagic != IDX_MAGIC_LABELS:
        raise FormatError(f"bad IDX label magic 0x{lmagic:08x}", offset=0)
    if lcount != count:
        raise FormatError(f"{count} images but {lcount} labels", offset=4)
    if len(labels) < 8 + lcount:
        raise FormatError("IDX label file truncated", offset=len(labels))
    y = np.frombuffer(labels, dtype=np.uint8, count=lcount, offset=8)

    features = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    return Dataset(features=features, labels=y.astype(np.int64))


CIFAR_RECORD = 3073  # 1 label byte + 3 * 32 * 32 pixel bytes


def load_cifar_bin(path):
    """Read a CIFAR-10 binary batch file (3073-byte records)."""
    raw = _read_file(path)
    if len(raw) == 0 or len(raw) % CIFAR_RECORD != 0:
        raise FormatError(
            f"CIFAR-10 batch length {len(raw)} is not a multiple of {CIFAR_RECORD}",
            offset=(len(raw) // CIFAR_RECORD) * CIFAR_RECORD,
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = records[:, 0].astype(np.int64)
    if labels.max(initial=0) > 9:
        raise FormatError("CIFAR-10 label byte out of range 0..9")
    features = records[:, 1:].astype(np.float64) / 255.0
    return Dataset(features=features, labels=labels)


def save_weights(weights, path):
    """Write a WeightSet as an EMIW container (float32 on disk)."""
    try:
        with open(path, "wb") as fh:
            fh.write(EMIW_MAGIC)
            fh.write(struct.pack("<II", EMIW_VERSION, weights.num_layers))
            for w, b in zip(weights.matrices, weights.biases):
                rows, cols = w.shape
                fh.write(struct.pack("<II", rows, cols))
                fh.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
                fh.write(np.asarray(b, dtype="<f4").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_weights(path):
    """Read an EMIW container back into a WeightSet (float64 in memory)."""
    raw = _read_file(path)
    if len(raw) < 12:
        raise FormatError("EMIW file truncated before header", offset=len(raw))
    if raw[:4] != EMIW_MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {EMIW_MAGIC!r}", offset=0)
    version, num_layers = struct.unpack("<II", raw[4:12])
    if version != EMIW_VERSION:
        raise VersionError(f"unsupported EMIW version {version}", offset=4)
    if num_layers == 0:
        raise FormatError("EMIW file declares zero layers", offset=8)
    pos = 12
    matrices, biases = [], []
    for l in range(num_layers):
        if len(raw) < pos + 8:
            raise FormatError(f"truncated in layer {l + 1} header", offset=pos)
        rows, cols = struct.unpack("<II", raw[pos : pos + 8])
        pos += 8
        if rows == 0 or cols == 0:
            raise FormatError(f"layer {l + 1} has zero dimension", offset=pos - 8)
        need = 4 * rows * cols
        if len(raw) < pos + need + 4 * rows:
            raise FormatError(f"truncated in layer {l + 1} data", offset=len(raw))
        w = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=pos)
        pos += need
        b = np.frombuffer(raw, dtype="<f4", count=rows, offset=pos)
        pos += 4 * rows
        matrices.append(w.reshape(rows, cols).astype(np.float64))
        biases.append(b.astype(np.float64))
    if pos != len(raw):
        raise FormatError(f"{len(raw) - pos} trailing bytes", offset=pos)
    return WeightSet(matrices=matrices, biases=biases)


def _int_list(obj, key, required=False):
    if key not in obj:
        if required:
            raise ParseError(f"missing required field {key!r}")
        return None
    value = obj[key]
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise ParseError(f"field {key!r} must be a list of integers")
    return value


def read_network_spec(path):
    """Parse a network spec file; returns (shape, profile, filters).

    ``profile`` and ``filters`` are None when absent.  All invariants of the
    corresponding types are enforced here with field-level diagnostics.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return parse_network_spec(text)


def parse_network_spec(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError("network spec must be a JSON object")
    unknown = set(obj) - {"layers", "profile", "filters"}
    if unknown:
        raise ParseError(f"unknown fields: {sorted(unknown)}")
    layers = _int_list(obj, "layers", required=True)
    if len(layers) < 2:
        raise ParseError("field 'layers' needs at least 2 entries")
    if any(n < 1 for n in layers):
        raise ParseError("field 'layers' entries must be positive")
    shape = LayeredShape(layers)

    profile = None
    raw_profile = _int_list(obj, "profile")
    if raw_profile is not None:
        if len(raw_profile) != len(layers):
            raise ParseError(
                f"field 'profile' has {len(raw_profile)} entries, "
                f"'layers' has {len(layers)}"
            )
        if any(a < 0 for a in raw_profile):
            raise ParseError("field 'profile' entries must be >= 0")
        if any(a > n for a, n in zip(raw_profile, layers)):
            raise ParseError("field 'profile' entries cannot exceed layer widths")
        profile = ActivationProfile(raw_profile)

    filters = _int_list(obj, "filters")
    if filters is not None:
        if len(filters) != len(layers):
            raise ParseError(
                f"field 'filters' has {len(filters)} entries, "
                f"'layers' has {len(layers)}"
            )
        if any(m < 0 for m in filters):
            raise ParseError("field 'filters' entries must be >= 0")
    return shape, profile, filters


def write_network_spec(path, shape, profile=None, filters=None):
    obj = {"layers": list(shape)}
    if profile is not None:
        obj["profile"] = list(profile)
    if filters is not None:
        obj["filters"] = list(filters)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


@dataclass
class ExperimentRecord:
    """One (seed, arm) run: config snapshot plus its epoch logs."""

    seed: int
    arm: str
    shape: list
    dataset_id: str
    alpha: float
    base_scheme: str
    lr: float
    batch_size: int
    epochs: int
    active_threshold: float
    use_batchnorm: bool = False
    timestamp: str = ""
    logs: list = field(default_factory=list)  # serialized EpochLog dicts


def epoch_log_to_dict(log):
    return {
        "epoch": log.epoch,
        "train_loss": log.train_loss,
        "train_accuracy": log.train_accuracy,
        "test_accuracy": log.test_accuracy,
        "emergence": str(log.emergence),
        "profile": list(log.profile),
    }


def record_to_dict(record):
    out = dict(record.__dict__)
    out["logs"] = list(record.logs)
    return out


def record_from_dict(obj):
    return ExperimentRecord(**obj)


def append_log(record, path):
    """Append one record as a single JSON line."""
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record_to_dict(record)) + "\n")
    except OSError as exc:
        raise IoError(f"cannot append to {path}: {exc}") from exc


def read_logs(path):
    """Read back every complete record; a trailing partial line is skipped."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    records = []
    lines = text.split("\n")
    trailing = lines[-1]
    for line in lines[:-1]:
        if line.strip():
            records.append(record_from_dict(json.loads(line)))
    if trailing.strip():
        warnings.warn(f"{path}: ignoring trailing partial line", stacklevel=2)
    return records
