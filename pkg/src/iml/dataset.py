"""Labeled datasets: loading, binarization, standardization and splitting."""
from __future__ import annotations

import csv
import json
import math
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

POSITIVE = 1
NEGATIVE = -1


class DatasetError(ValueError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with one label per row.

    Labels are either raw values straight from a file (strings) or, after
    :func:`binarize_labels`, integers in {-1, +1}.  Everything downstream of
    ingestion requires the binary form; see :meth:`require_binary`.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-d matrix")
        y = np.array(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DatasetError(
                f"{X.shape[0]} feature rows but {y.shape[0] if y.ndim else 0} labels")
        if not np.all(np.isfinite(X)):
            raise DatasetError("non-finite feature value")
        if y.dtype.kind in "iuf" and np.all(np.isin(y, (NEGATIVE, POSITIVE))):
            y = y.astype(np.int8)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != X.shape[1]:
                raise DatasetError("feature_names length does not match d")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.labels.dtype == np.int8

    def require_binary(self) -> None:
        if not self.is_binary:
            raise DatasetError(f"dataset {self.name!r} is not binarized")

    def require_both_classes(self, minimum: int = 1) -> None:
        self.require_binary()
        if self.n_pos < minimum or self.n_neg < minimum:
            raise DatasetError(
                f"dataset {self.name!r} needs at least {minimum} example(s) per "
                f"class, has {self.n_pos} positive / {self.n_neg} negative")

    @property
    def n_pos(self) -> int:
        self.require_binary()
        return int(np.count_nonzero(self.labels == POSITIVE))

    @property
    def n_neg(self) -> int:
        self.require_binary()
        return int(np.count_nonzero(self.labels == NEGATIVE))

    @property
    def minority_fraction(self) -> float:
        return self.n_pos / self.n if self.n else 0.0

    def subset(self, index: Sequence[int] | np.ndarray) -> "LabeledDataset":
        index = np.asarray(index, dtype=np.intp)
        return replace(self, features=self.features[index], labels=self.labels[index])

    def with_features(self, features: np.ndarray) -> "LabeledDataset":
        return replace(self, features=features)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.3
    repeats: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError("train_fraction must be strictly between 0 and 1")
        if self.repeats < 1:
            raise DatasetError("repeats must be positive")


def derive_seed(*parts: int | str) -> np.random.SeedSequence:
    """Seed sequence that depends only on ``parts`` (strings hashed by CRC32)."""
    entropy = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) % 2**64
               for p in parts]
    return np.random.SeedSequence(entropy)


def rng_for(*parts: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


# ---------------------------------------------------------------------------
# loading

def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path: str | Path, label_column: int | str = -1,
             header: bool | None = None, name: str | None = None) -> LabeledDataset:
    """Read a comma-separated file into a dataset with raw string labels.

    ``label_column`` is a column index (negative counts from the end) or a
    header name.  ``header=None`` detects a header row: the first row is a
    header when one of its feature cells is not a number.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[c.strip() for c in row] for row in csv.reader(fh) if any(c.strip() for c in row)]
    if not rows:
        raise DatasetError(f"{path}: empty dataset")
    width = len(rows[0])
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise DatasetError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
    if width < 2:
        raise DatasetError(f"{path}: need at least one feature and a label column")

    names = None
    if isinstance(label_column, str):
        header = True
        names = rows[0]
        if label_column not in names:
            raise DatasetError(f"{path}: no column named {label_column!r}")
        col = names.index(label_column)
    else:
        col = label_column if label_column >= 0 else width + label_column
        if not 0 <= col < width:
            raise DatasetError(f"{path}: label column {label_column} out of range")
        if header is None:
            header = not all(_is_float(c) for j, c in enumerate(rows[0]) if j != col)
        if header:
            names = rows[0]
    body = rows[1:] if header else rows
    if not body:
        raise DatasetError(f"{path}: empty dataset")

    feat_cols = [j for j in range(width) if j != col]
    X = np.empty((len(body), len(feat_cols)))
    for i, row in enumerate(body):
        for jj, j in enumerate(feat_cols):
            try:
                X[i, jj] = float(row[j])
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric feature {row[j]!r} at row {i + 1}, column {j}") from None
    if not np.all(np.isfinite(X)):
        raise DatasetError(f"{path}: non-finite feature")
    labels = np.array([row[col] for row in body], dtype=object)
    return LabeledDataset(
        X, labels,
        feature_names=tuple(names[j] for j in feat_cols) if names else None,
        name=name if name is not None else path.stem,
    )


def binarize_labels(dataset: LabeledDataset, positive_labels: Iterable) -> LabeledDataset:
    """Map ``positive_labels`` to +1 and every other raw label to -1."""
    raw = np.asarray(dataset.labels).astype(str)
    positive = {str(p) for p in positive_labels}
    observed = set(raw.tolist())
    if not positive & observed:
        raise DatasetError(f"none of {sorted(positive)} occur in the labels {sorted(observed)}")
    if observed <= positive:
        raise DatasetError("positive_labels cover every observed label")
    y = np.where(np.isin(raw, list(positive)), POSITIVE, NEGATIVE).astype(np.int8)
    return replace(dataset, labels=y)


# ---------------------------------------------------------------------------
# standardization

@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, data):
        if isinstance(data, LabeledDataset):
            return data.with_features(self.transform(data.features))
        return (np.asarray(data, dtype=float) - self.mean) / self.std


def normalize_zscore(dataset: LabeledDataset) -> tuple[LabeledDataset, Standardizer]:
    """Standardize each column to mean 0, variance 1 (population std).

    Constant columns map to zero.  The returned :class:`Standardizer` carries
    the fitted statistics so held-out data is transformed consistently.
    """
    if dataset.n < 2:
        raise DatasetError("standardization needs at least two rows")
    mean = dataset.features.mean(axis=0)
    std = dataset.features.std(axis=0)
    # tolerance covers constant columns whose std picks up rounding noise
    std = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 1.0, std)
    scaler = Standardizer(_frozen(mean), _frozen(std))
    return scaler.transform(dataset), scaler


# ---------------------------------------------------------------------------
# splitting

def _class_indices(dataset: LabeledDataset) -> list[np.ndarray]:
    # positives first so that allocation ties favour the minority class
    return [np.flatnonzero(dataset.labels == POSITIVE), np.flatnonzero(dataset.labels == NEGATIVE)]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split_indices(dataset: LabeledDataset, spec: SplitSpec,
                             repeat_index: int) -> tuple[np.ndarray, np.ndarray]:
    dataset.require_both_classes(2)
    rng = rng_for(spec.seed, repeat_index, "split")
    classes = _class_indices(dataset)
    quotas = [spec.train_fraction * len(c) for c in classes]
    counts = [int(math.floor(q)) for q in quotas]
    target = _round_half_up(spec.train_fraction * dataset.n)
    order = sorted(range(len(classes)), key=lambda c: -(quotas[c] - counts[c]))
    for c in order[: max(0, target - sum(counts))]:
        counts[c] += 1
    for c, count in enumerate(counts):
        if count == 0:
            raise DatasetError("a class would receive no training examples")
        if count == len(classes[c]):
            raise DatasetError("a class would receive no test examples")
    train, test = [], []
    for idx, count in zip(classes, counts):
        shuffled = rng.permutation(idx)
        train.append(shuffled[:count])
        test.append(shuffled[count:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_split(dataset: LabeledDataset, spec: SplitSpec,
                     repeat_index: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic stratified train/test split for one repeat."""
    train, test = stratified_split_indices(dataset, spec, repeat_index)
    return dataset.subset(train), dataset.subset(test)


def stratified_folds(dataset: LabeledDataset, folds: int, seed) -> list[np.ndarray]:
    """Partition row indices into ``folds`` stratified validation folds.

    Each class is shuffled and dealt round-robin, continuing from where the
    previous class stopped, so fold sizes differ by at most one.
    """
    dataset.require_both_classes(folds)
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    offset = 0
    for idx in _class_indices(dataset):
        for j, i in enumerate(rng.permutation(idx)):
            buckets[(offset + j) % folds].append(int(i))
        offset = (offset + len(idx)) % folds
    return [np.sort(np.array(b, dtype=np.intp)) for b in buckets]


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class RegistryEntry:
    name: str
    path: Path
    label_column: int | str = -1
    positive_labels: tuple[str, ...] = field(default_factory=tuple)
    header: bool | None = None

    def load(self) -> LabeledDataset:
        raw = load_csv(self.path, self.label_column, header=self.header, name=self.name)
        return binarize_labels(raw, self.positive_labels)


def load_registry(path: str | Path) -> dict[str, RegistryEntry]:
    """Read a JSON registry of datasets; relative paths resolve against it."""
    path = Path(path)
    doc = json.loads(path.read_text())
    entries = {}
    for name, spec in doc.get("datasets", {}).items():
        entries[name] = RegistryEntry(
            name=name,
            path=(path.parent / spec["path"]).resolve(),
            label_column=spec.get("label_column", -1),
            positive_labels=tuple(str(p) for p in spec["positive_labels"]),
            header=spec.get("header"),
        )
    return entries


def builtin_registry_path() -> Path:
    return Path(__file__).parent / "data" / "registry.json"


def load_builtin(name: str) -> LabeledDataset:
    """Load one of the bundled benchmark datasets, already binarized."""
    entries = load_registry(builtin_registry_path())
    if name not in entries:
        raise DatasetError(f"unknown dataset {name!r}; bundled: {sorted(entries)}")
    return entries[name].load()


# ---------------------------------------------------------------------------
# synthetic data

def make_overlapping_gaussians(n: int, minority_fraction: float, seed,
                               separation: float = 1.5, noise_dims: int = 1,
                               noise_scale: float = 3.0, d: int = 2, angle: float = 0.0,
                               name: str = "gaussians") -> LabeledDataset:
    """Two overlapping Gaussian classes in ``d`` dimensions.

    The class means differ by ``separation`` along the informative axes
    (the first ``d - noise_dims``); the remaining axes carry shared noise
    with standard deviation ``noise_scale`` so that the Euclidean metric is
    a poor fit and a learned one has something to gain.  A nonzero ``angle``
    rotates the plane of the last informative axis and the first noise
    axis, mixing signal and noise so that per-feature standardization cannot
    separate them again.
    """
    if not 0 < noise_dims < d:
        raise DatasetError("need at least one informative and one noise dimension")
    rng = np.random.default_rng(seed)
    n_pos = max(1, _round_half_up(minority_fraction * n))
    n_neg = n - n_pos
    informative = d - noise_dims
    scale = np.r_[np.ones(informative), np.full(noise_dims, noise_scale)]
    shift = np.r_[np.full(informative, separation / math.sqrt(informative)), np.zeros(noise_dims)]
    Xp = rng.standard_normal((n_pos, d)) * scale + shift
    Xn = rng.standard_normal((n_neg, d)) * scale
    X = np.vstack([Xp, Xn])
    if angle:
        c, s = math.cos(angle), math.sin(angle)
        plane = [informative - 1, informative]
        X[:, plane] = X[:, plane] @ np.array([[c, s], [-s, c]])
    y = np.r_[np.full(n_pos, POSITIVE), np.full(n_neg, NEGATIVE)].astype(np.int8)
    order = rng.permutation(n)
    return LabeledDataset(X[order], y[order], name=name)

