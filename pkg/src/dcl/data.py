"""Synthetic imbalanced multi-attribute data plus CSV ingestion.

The generator draws isotropic Gaussian noise and, for every attribute,
shifts each sample along that attribute's own direction: positive shift
for the minority class (label 1), negative for the majority (label 0).
Directions are orthonormal when the feature dimension allows it, so the
attributes do not leak into each other and every attribute's difficulty is
set purely by ``class_separation / noise_sd``.  Imbalance is exact up to
rounding: ratio r puts round(n / (1 + r)) samples in the minority class.

Datasets round-trip losslessly through CSV (floats are written with repr,
which parses back bit for bit) with a JSON manifest sidecar recording how
the data was made.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distribution import ClassDistribution
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")
SPLIT_FRACTIONS = (0.7, 0.1, 0.2)
_LOAD_SPLIT_SEED = 20190417  # fixed so re-loading a CSV always splits the same way

# Desk-scale benchmark defaults: 20 binary attributes with imbalance
# ratios log-spaced from 1:1 to 1:100.
DESK_NUM_ATTRIBUTES = 20
DESK_N_SAMPLES = 20_000
DESK_FEATURE_DIM = 32
DESK_RATIOS = tuple(float(r) for r in np.logspace(0.0, 2.0, DESK_NUM_ATTRIBUTES))


@dataclass(eq=False)
class Dataset:
    """Features [sample x dim], labels [attribute x sample], and a split
    assignment per sample (values index into SPLIT_NAMES)."""

    features: np.ndarray
    labels: np.ndarray
    attribute_names: list[str]
    split: np.ndarray
    manifest: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.split = np.asarray(self.split, dtype=np.int8)
        n = self.features.shape[0]
        if self.features.ndim != 2:
            raise ValueError("features must be [sample x dim]")
        if self.labels.ndim != 2 or self.labels.shape[1] != n:
            raise ValueError("labels must be [attribute x sample]")
        if len(self.attribute_names) != self.labels.shape[0]:
            raise ValueError("one name per attribute required")
        if self.split.shape != (n,):
            raise ValueError("split must assign every sample")
        if np.any(self.labels < 0):
            raise DataError("negative class id")
        if np.any((self.split < 0) | (self.split >= len(SPLIT_NAMES))):
            raise DataError("split value out of range")
        if not np.all(np.isfinite(self.features)):
            raise DataError("non-finite feature value")

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_attributes(self) -> int:
        return self.labels.shape[0]

    def split_indices(self, name: str) -> np.ndarray:
        return np.nonzero(self.split == SPLIT_NAMES.index(name))[0]

    def distributions(self, split_name: str = "train") -> list[ClassDistribution]:
        """Per-attribute class distributions over one split."""
        idx = self.split_indices(split_name)
        out = []
        for a in range(self.num_attributes):
            counts = np.bincount(self.labels[a, idx], minlength=2)
            out.append(ClassDistribution.from_counts(counts))
        return out

    def minority_classes(self, split_name: str = "train") -> np.ndarray:
        """The least frequent class id of each attribute on a split; this
        is the class the balanced-accuracy metric treats as positive."""
        return np.array([int(d.class_ids[0]) for d in self.distributions(split_name)])


def _stratified_split(strat_labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """70/10/20 assignment, stratified on one label vector so its minority
    class lands in every split proportionally."""
    n = strat_labels.shape[0]
    split = np.empty(n, dtype=np.int8)
    for cls in np.unique(strat_labels):
        members = np.nonzero(strat_labels == cls)[0]
        members = rng.permutation(members)
        n_train = int(round(len(members) * SPLIT_FRACTIONS[0]))
        n_val = int(round(len(members) * SPLIT_FRACTIONS[1]))
        split[members[:n_train]] = 0
        split[members[n_train : n_train + n_val]] = 1
        split[members[n_train + n_val :]] = 2
    return split


def _rarest_attribute(labels: np.ndarray) -> int:
    """Index of the attribute with the largest class imbalance."""
    worst, worst_ratio = 0, 0.0
    for a in range(labels.shape[0]):
        counts = np.bincount(labels[a])
        counts = counts[counts > 0]
        ratio = counts.max() / counts.min() if counts.size > 1 else np.inf
        if ratio > worst_ratio:
            worst, worst_ratio = a, ratio
    return worst


def generate_synthetic(
    imbalance_ratios,
    n_samples: int,
    feature_dim: int,
    class_separation: float = 3.0,
    noise_sd: float = 1.0,
    seed: int = 0,
    attribute_names: list[str] | None = None,
) -> Dataset:
    """Draw a dataset with one binary attribute per requested ratio.

    Each ratio r >= 1 is majority:minority; the realized counts are exact
    up to rounding.  Samples sit at +-class_separation/2 along the
    attribute's direction with isotropic noise_sd noise on top, so the
    per-attribute Bayes balanced accuracy is Phi(class_separation / (2 *
    noise_sd)) regardless of imbalance.  Fully deterministic in ``seed``.
    """
    ratios = [float(r) for r in imbalance_ratios]
    if not ratios:
        raise ConfigError("at least one attribute ratio required")
    if any(r < 1.0 for r in ratios):
        raise ConfigError(f"imbalance ratios must be >= 1 (majority:minority), got {ratios}")
    if n_samples < 2:
        raise ConfigError("n_samples too small")
    if feature_dim < 1:
        raise ConfigError("feature_dim must be positive")
    if class_separation < 0.0 or noise_sd <= 0.0:
        raise ConfigError("class_separation must be >= 0 and noise_sd > 0")
    num_attributes = len(ratios)
    if attribute_names is None:
        attribute_names = [f"attr_{a:02d}" for a in range(num_attributes)]
    elif len(attribute_names) != num_attributes:
        raise ConfigError("one attribute name per ratio required")

    minority_counts = []
    for a, r in enumerate(ratios):
        m = int(round(n_samples / (1.0 + r)))
        if m < 1:
            raise ConfigError(f"attribute {a}: ratio {r} leaves no minority samples at n={n_samples}")
        if m < 10:
            log.warning("attribute %d: only %d minority samples, statistics will be fragile", a, m)
        minority_counts.append(m)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 1001])))
    if feature_dim >= num_attributes:
        directions, _ = np.linalg.qr(rng.standard_normal((feature_dim, num_attributes)))
        directions = directions.T
    else:
        log.warning("feature_dim %d < %d attributes: directions cannot be orthogonal", feature_dim, num_attributes)
        directions = rng.standard_normal((num_attributes, feature_dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    labels = np.zeros((num_attributes, n_samples), dtype=np.int64)
    for a, m in enumerate(minority_counts):
        labels[a, rng.permutation(n_samples)[:m]] = 1

    features = rng.standard_normal((n_samples, feature_dim)) * noise_sd
    shifts = np.where(labels, 0.5 * class_separation, -0.5 * class_separation)
    features += shifts.T @ directions

    split = _stratified_split(labels[_rarest_attribute(labels)], rng)
    manifest = {
        "attribute_names": list(attribute_names),
        "imbalance_ratios": ratios,
        "n_samples": int(n_samples),
        "feature_dim": int(feature_dim),
        "class_separation": float(class_separation),
        "noise_sd": float(noise_sd),
        "seed": int(seed),
    }
    return Dataset(features=features, labels=labels, attribute_names=list(attribute_names),
                   split=split, manifest=manifest)


def save_csv(dataset: Dataset, path) -> None:
    """Write the dataset as CSV plus a JSON manifest sidecar.

    Columns: feature_<i> floats (repr, so they parse back bit for bit),
    one integer column per attribute, and a split column.
    """
    path = Path(path)
    feature_cols = [f"feature_{i:02d}" for i in range(dataset.features.shape[1])]
    header = feature_cols + list(dataset.attribute_names) + ["split"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.num_samples):
            row = [repr(float(v)) for v in dataset.features[i]]
            row += [str(int(v)) for v in dataset.labels[:, i]]
            row.append(SPLIT_NAMES[dataset.split[i]])
            writer.writerow(row)
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(dataset.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class CsvSchema:
    """Which CSV columns are features, which are attribute labels, and
    (optionally) which column carries a train/val/test assignment."""

    feature_columns: list[str]
    attribute_columns: list[str]
    split_column: str | None = None

    @classmethod
    def infer(cls, header: list[str]) -> "CsvSchema":
        """Columns named feature_* are features, 'split' is the split
        column, everything else is an attribute."""
        features = [c for c in header if c.startswith("feature_")]
        split = "split" if "split" in header else None
        attributes = [c for c in header if not c.startswith("feature_") and c != split]
        if not features or not attributes:
            raise DataError(f"cannot infer schema from header {header}: need feature_* and attribute columns")
        return cls(feature_columns=features, attribute_columns=attributes, split_column=split)


def load_csv(path, schema: CsvSchema | None = None) -> Dataset:
    """Parse a CSV (header mandatory) into a Dataset.

    Without a split column, samples are split 70/10/20 with a fixed seed,
    stratified on the most imbalanced attribute, so repeated loads agree.
    Parse failures name the offending line.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header required") from None
        if schema is None:
            schema = CsvSchema.infer(header)
        missing = [c for c in schema.feature_columns + schema.attribute_columns if c not in header]
        if schema.split_column is not None and schema.split_column not in header:
            missing.append(schema.split_column)
        if missing:
            raise DataError(f"{path}: columns {missing} not in header")
        col = {name: header.index(name) for name in header}

        features, labels, split = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                features.append([float(row[col[c]]) for c in schema.feature_columns])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad feature value ({exc})") from None
            try:
                lab = [int(row[col[c]]) for c in schema.attribute_columns]
            except ValueError:
                raise DataError(f"{path}:{lineno}: attribute labels must be integers") from None
            if any(v < 0 for v in lab):
                raise DataError(f"{path}:{lineno}: attribute labels must be non-negative")
            labels.append(lab)
            if schema.split_column is not None:
                token = row[col[schema.split_column]]
                if token not in SPLIT_NAMES:
                    raise DataError(f"{path}:{lineno}: unknown split {token!r}, expected one of {SPLIT_NAMES}")
                split.append(SPLIT_NAMES.index(token))

    if not features:
        raise DataError(f"{path}: no data rows")
    features = np.array(features)
    labels = np.array(labels, dtype=np.int64).T
    if schema.split_column is None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_LOAD_SPLIT_SEED)))
        split = _stratified_split(labels[_rarest_attribute(labels)], rng)
    else:
        split = np.array(split, dtype=np.int8)

    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest = {}
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    return Dataset(features=features, labels=labels,
                   attribute_names=list(schema.attribute_columns), split=split, manifest=manifest)
