"""Class-balance preprocessing: SMOTE, random under-sampling, imbalance variants."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import NEGATIVE, POSITIVE, DatasetError, LabeledDataset

SMOTE_NEIGHBORS = 5


@dataclass(frozen=True)
class ImbalanceTarget:
    minority_fraction: float
    min_minority: int = 20

    def __post_init__(self):
        if not 0.0 < self.minority_fraction <= 1.0:
            raise DatasetError("minority_fraction must lie in (0, 1]")
        if self.min_minority < 1:
            raise DatasetError("min_minority must be at least 1")


def smote(train: LabeledDataset, seed, k_neighbors: int = SMOTE_NEIGHBORS) -> LabeledDataset:
    """Over-sample the positive class with SMOTE until both classes are equal.

    Parents are visited round-robin; for each one a neighbour is drawn from
    its ``k_neighbors`` nearest positives (Euclidean, clamped to n+ - 1) and
    a synthetic point is placed uniformly at random on the segment between
    them.  Original rows come first, synthetic rows are appended.
    """
    n_pos, n_neg = train.n_pos, train.n_neg
    if n_pos == n_neg:
        return train
    if n_pos < 2:
        raise DatasetError("SMOTE needs at least 2 minority examples")
    if n_pos > n_neg:
        raise DatasetError("SMOTE expects the positive class to be the minority")

    rng = np.random.default_rng(seed)
    pos = train.features[train.labels == POSITIVE]
    k = min(k_neighbors, n_pos - 1)
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]

    needed = n_neg - n_pos
    parents = np.arange(needed) % n_pos
    picks = neighbors[parents, rng.integers(0, k, size=needed)]
    u = rng.random(needed)[:, None]
    synthetic = pos[parents] + u * (pos[picks] - pos[parents])

    X = np.vstack([train.features, synthetic])
    y = np.concatenate([train.labels, np.full(needed, POSITIVE, dtype=np.int8)])
    return replace(train, features=X, labels=y)


def _keep_random(rng: np.random.Generator, idx: np.ndarray, count: int) -> np.ndarray:
    return np.sort(rng.choice(idx, size=count, replace=False))


def random_under_sample(train: LabeledDataset, seed) -> LabeledDataset:
    """Drop randomly chosen negatives until n- equals n+; row order is kept."""
    n_pos, n_neg = train.n_pos, train.n_neg
    if n_pos < 1:
        raise DatasetError("random under-sampling needs at least one positive")
    if n_neg <= n_pos:
        return train
    rng = np.random.default_rng(seed)
    kept_neg = _keep_random(rng, np.flatnonzero(train.labels == NEGATIVE), n_pos)
    keep = np.sort(np.concatenate([np.flatnonzero(train.labels == POSITIVE), kept_neg]))
    return train.subset(keep)


def _nearest_count(fixed: int, target: float, upper: int, minority_varies: bool) -> int:
    """Count in [0, upper] whose resulting minority fraction is closest to target."""
    if minority_varies:
        ideal = target * fixed / (1.0 - target)
        lower = 0

        def frac(c):
            return c / (c + fixed)
    else:
        ideal = fixed * (1.0 - target) / target
        lower = 1

        def frac(c):
            return fixed / (fixed + c)
    base = int(np.floor(ideal))
    candidates = {min(max(base + off, lower), upper) for off in (0, 1)}
    # ties go to the larger count, i.e. the variant that discards less data
    return min(candidates, key=lambda c: (abs(frac(c) - target), -c))


def make_imbalance_variant(dataset: LabeledDataset, target: ImbalanceTarget,
                           seed) -> LabeledDataset | None:
    """Under-sample one class so the positive fraction approaches the target.

    Returns ``None`` when the variant would keep fewer than
    ``target.min_minority`` positives.
    """
    p, q = dataset.n_pos, dataset.n_neg
    f = target.minority_fraction
    if f >= 1.0 or q == 0:
        raise DatasetError("a variant with no majority examples is unreachable")
    current = p / (p + q)
    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(dataset.labels == POSITIVE)
    neg_idx = np.flatnonzero(dataset.labels == NEGATIVE)

    if np.isclose(f, current):
        new_p, new_q = p, q
    elif f > current:
        new_p, new_q = p, _nearest_count(p, f, q, minority_varies=False)
    else:
        new_p, new_q = _nearest_count(q, f, p, minority_varies=True), q

    if new_p < target.min_minority:
        return None
    if new_p == p and new_q == q:
        return dataset
    keep = np.concatenate([
        _keep_random(rng, pos_idx, new_p) if new_p < p else pos_idx,
        _keep_random(rng, neg_idx, new_q) if new_q < q else neg_idx,
    ])
    return dataset.subset(np.sort(keep))
