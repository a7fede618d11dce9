"""Dataset ingestion, synthetic generation, splitting, and client partitioning.

A :class:`Dataset` is an in-memory table of float64 features plus integer
class labels.  Partitioning functions assign sample indices to simulated
clients, either IID (shuffle + round-robin deal) or with Dirichlet label
skew.  All operations are pure and deterministic given a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CsvParseError, DataError, PartitionError
from .rng import PARTITION, SPLIT, SYNTH, SeedTree


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (N x D), integer labels in [0, class_count), class count."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError("features must be a non-empty N x D matrix")
        if labels.shape != (feats.shape[0],):
            raise DataError("labels must be a vector with one entry per row")
        if not np.isfinite(feats).all():
            raise DataError("features contain non-finite values")
        if self.class_count < 2:
            raise DataError("class_count must be at least 2")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise DataError("labels must lie in [0, class_count)")

    @property
    def sample_count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Row subset sharing this dataset's class count."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_count)


@dataclass(frozen=True)
class Partition:
    """Disjoint, complete, non-empty assignment of sample indices to K clients.

    Each assignment is stored as a sorted index array; client views are
    therefore canonical regardless of the shuffle order that produced them.
    """

    assignments: tuple[np.ndarray, ...]
    sample_count: int

    def __post_init__(self):
        sorted_assignments = tuple(
            np.sort(np.asarray(a, dtype=np.int64)) for a in self.assignments
        )
        object.__setattr__(self, "assignments", sorted_assignments)
        if not sorted_assignments:
            raise PartitionError("partition needs at least one client")
        sizes = [len(a) for a in sorted_assignments]
        if min(sizes) == 0:
            raise PartitionError("every client must receive at least one sample")
        merged = np.concatenate(sorted_assignments)
        if len(merged) != self.sample_count or not np.array_equal(
            np.sort(merged), np.arange(self.sample_count)
        ):
            raise PartitionError("assignments must partition the full index range")

    @property
    def client_count(self) -> int:
        return len(self.assignments)

    def sizes(self) -> list[int]:
        return [len(a) for a in self.assignments]


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian-blob generator parameters: one blob per class."""

    class_count: int = 2
    dims: int = 8
    samples_per_class: int = 500
    center_separation: float = 6.0
    noise_stddev: float = 1.0

    def __post_init__(self):
        if self.class_count < 2:
            raise DataError("class_count must be at least 2")
        if self.dims < 1:
            raise DataError("dims must be positive")
        if self.samples_per_class < 2:
            raise DataError("samples_per_class must be at least 2")
        if self.center_separation < 0:
            raise DataError("center_separation must be non-negative")
        if self.noise_stddev <= 0:
            raise DataError("noise_stddev must be positive")

    def class_centers(self) -> np.ndarray:
        """Blob centers: class c sits at center_separation * e_(c mod dims)."""
        centers = np.zeros((self.class_count, self.dims))
        for c in range(self.class_count):
            centers[c, c % self.dims] = self.center_separation
        return centers


def load_csv(path: str, header: bool = False) -> Dataset:
    """Parse a CSV file of D feature columns followed by an integer label.

    Args:
        path: file to read (UTF-8, comma-separated, LF line endings).
        header: skip the first line when True.

    Raises:
        CsvParseError: non-numeric cell, inconsistent arity, or empty file;
            the message names the 1-based line number.
        DataError: negative label or fewer than two classes.
    """
    features: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read dataset file: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            if header and lineno == 1:
                continue
            line = raw.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
                if width < 2:
                    raise CsvParseError(
                        f"line {lineno}: expected at least one feature and a label"
                    )
            elif len(cells) != width:
                raise CsvParseError(
                    f"line {lineno}: expected {width} columns, found {len(cells)}"
                )
            try:
                row = [float(c) for c in cells[:-1]]
            except ValueError as exc:
                raise CsvParseError(f"line {lineno}: non-numeric feature: {exc}") from exc
            if not all(math.isfinite(v) for v in row):
                raise CsvParseError(f"line {lineno}: non-finite feature value")
            try:
                label = int(cells[-1])
            except ValueError as exc:
                raise CsvParseError(f"line {lineno}: non-integer label: {exc}") from exc
            if label < 0:
                raise DataError(f"line {lineno}: negative label {label}")
            features.append(row)
            labels.append(label)
    if not features:
        raise CsvParseError("file contains no data rows")
    label_arr = np.array(labels, dtype=np.int64)
    class_count = int(label_arr.max()) + 1
    if class_count < 2:
        raise DataError("dataset must contain at least two classes")
    return Dataset(np.array(features, dtype=np.float64), label_arr, class_count)


def write_csv(ds: Dataset, path: str) -> None:
    """Write a dataset in the canonical format load_csv reads back unchanged.

    Floats use their shortest round-trip representation, labels are bare
    integers, lines end with LF.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row, label in zip(ds.features, ds.labels):
            cells = [repr(float(v)) for v in row]
            cells.append(str(int(label)))
            fh.write(",".join(cells) + "\n")


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    """Draw class_count Gaussian blobs with isotropic noise.

    Samples are grouped by class: rows [c*S, (c+1)*S) carry label c, so
    label counts are exactly samples_per_class for every class.
    """
    rng = SeedTree(seed).generator(SYNTH)
    centers = spec.class_centers()
    blocks = []
    for c in range(spec.class_count):
        noise = rng.normal(0.0, spec.noise_stddev, size=(spec.samples_per_class, spec.dims))
        blocks.append(centers[c] + noise)
    features = np.concatenate(blocks, axis=0)
    labels = np.repeat(np.arange(spec.class_count, dtype=np.int64), spec.samples_per_class)
    return Dataset(features, labels, spec.class_count)


def split_train_test(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/test split.

    Per class, round(test_fraction * class_size) samples go to the test
    side, clamped so both sides keep at least one sample of every class
    (per-class ROC curves need every class present in the test set).

    Raises:
        DataError: test_fraction outside (0, 1) or a class with < 2 samples.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must lie strictly between 0 and 1")
    rng = SeedTree(seed).generator(SPLIT)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for c in range(ds.class_count):
        members = np.flatnonzero(ds.labels == c)
        if len(members) < 2:
            raise DataError(
                f"class {c} has {len(members)} sample(s); stratified split needs at least 2"
            )
        count = int(round(test_fraction * len(members)))
        count = min(max(count, 1), len(members) - 1)
        order = rng.permutation(len(members))
        test_idx.append(members[order[:count]])
        train_idx.append(members[order[count:]])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return ds.subset(train), ds.subset(test)


def partition_iid(ds: Dataset, clients: int, seed: int) -> Partition:
    """Shuffle indices with a seeded stream and deal them round-robin.

    Client sizes differ by at most one.

    Raises:
        PartitionError: clients < 1 or more clients than samples.
    """
    if clients < 1:
        raise PartitionError("need at least one client")
    if clients > ds.sample_count:
        raise PartitionError(
            f"cannot split {ds.sample_count} samples across {clients} clients"
        )
    rng = SeedTree(seed).generator(PARTITION)
    order = rng.permutation(ds.sample_count)
    assignments = tuple(order[k::clients] for k in range(clients))
    return Partition(assignments, ds.sample_count)


def partition_dirichlet(ds: Dataset, clients: int, alpha: float, seed: int) -> Partition:
    """Label-skewed partition: per class, client shares drawn from Dirichlet(alpha).

    The Dirichlet vector is built from per-coordinate Gamma(alpha, 1) draws
    normalized to sum one.  Low alpha concentrates each class on few
    clients; clients left empty are repaired by stealing one sample from
    the currently largest client.

    Raises:
        PartitionError: clients < 1, alpha <= 0, or more clients than samples.
    """
    if clients < 1:
        raise PartitionError("need at least one client")
    if alpha <= 0:
        raise PartitionError("alpha must be positive")
    if clients > ds.sample_count:
        raise PartitionError(
            f"cannot split {ds.sample_count} samples across {clients} clients"
        )
    rng = SeedTree(seed).generator(PARTITION)
    buckets: list[list[int]] = [[] for _ in range(clients)]
    for c in range(ds.class_count):
        members = np.flatnonzero(ds.labels == c)
        rng.shuffle(members)
        gammas = rng.gamma(alpha, 1.0, size=clients)
        total = gammas.sum()
        if total == 0.0:  # extreme alpha underflow: hand the class to one client
            proportions = np.zeros(clients)
            proportions[int(rng.integers(clients))] = 1.0
        else:
            proportions = gammas / total
        counts = _proportional_counts(proportions, len(members))
        start = 0
        for k in range(clients):
            buckets[k].extend(members[start : start + counts[k]].tolist())
            start += counts[k]
    _repair_empty(buckets)
    assignments = tuple(np.array(b, dtype=np.int64) for b in buckets)
    return Partition(assignments, ds.sample_count)


def _proportional_counts(proportions: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to `total`, apportioned by largest remainder."""
    raw = proportions * total
    counts = np.floor(raw).astype(np.int64)
    shortfall = total - int(counts.sum())
    if shortfall > 0:
        remainders = raw - counts
        # ties broken toward lower client index via stable sort
        order = np.argsort(-remainders, kind="stable")
        counts[order[:shortfall]] += 1
    return counts


def _repair_empty(buckets: list[list[int]]) -> None:
    """Move one sample from the largest bucket into each empty one."""
    while True:
        empties = [k for k, b in enumerate(buckets) if not b]
        if not empties:
            return
        donor = max(range(len(buckets)), key=lambda k: (len(buckets[k]), -k))
        if len(buckets[donor]) < 2:
            raise PartitionError("not enough samples to give every client one")
        buckets[empties[0]].append(buckets[donor].pop())
