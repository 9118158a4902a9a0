"""Label-typed pair sets for pairwise metric learning."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetError, LabeledDataset, POSITIVE
from .metric import pairwise_sq_distances

_EMPTY = np.empty((0, 2), dtype=np.intp)


def _as_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.intp).reshape(-1, 2) if len(pairs) else _EMPTY.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PairSets:
    """Four (anchor, partner) index arrays of shape (p, 2).

    ``sim_pos``: both positive.  ``sim_neg``: both negative.
    ``dis_pos``: positive anchor, negative partner.
    ``dis_neg``: negative anchor, positive partner.
    """

    sim_pos: np.ndarray
    sim_neg: np.ndarray
    dis_pos: np.ndarray
    dis_neg: np.ndarray

    def __post_init__(self):
        for name in self.names():
            object.__setattr__(self, name, _as_pairs(getattr(self, name)))

    @staticmethod
    def names() -> tuple[str, str, str, str]:
        return ("sim_pos", "sim_neg", "dis_pos", "dis_neg")

    def items(self):
        return [(name, getattr(self, name)) for name in self.names()]

    def sizes(self) -> dict[str, int]:
        return {name: len(p) for name, p in self.items()}

    def __len__(self) -> int:
        return sum(len(p) for _, p in self.items())

    def __eq__(self, other):
        if not isinstance(other, PairSets):
            return NotImplemented
        return all(np.array_equal(a, b) for (_, a), (_, b) in zip(self.items(), other.items()))

    def validate(self, labels: np.ndarray) -> None:
        """Raise if any pair is routed to the wrong set or is a self-pair."""
        expected = {"sim_pos": (1, 1), "sim_neg": (-1, -1), "dis_pos": (1, -1), "dis_neg": (-1, 1)}
        for name, p in self.items():
            if not len(p):
                continue
            if np.any(p[:, 0] == p[:, 1]):
                raise ValueError(f"{name} contains a self-pair")
            a, b = expected[name]
            if np.any(labels[p[:, 0]] != a) or np.any(labels[p[:, 1]] != b):
                raise ValueError(f"{name} contains a pair with the wrong labels")


def route_pairs(labels: np.ndarray, anchors: np.ndarray, partners: np.ndarray) -> PairSets:
    """Split (anchor, partner) pairs into the four sets by their labels."""
    anchors = np.asarray(anchors, dtype=np.intp)
    partners = np.asarray(partners, dtype=np.intp)
    ya = labels[anchors] == POSITIVE
    yb = labels[partners] == POSITIVE
    pairs = np.column_stack([anchors, partners])
    return PairSets(
        sim_pos=pairs[ya & yb],
        sim_neg=pairs[~ya & ~yb],
        dis_pos=pairs[ya & ~yb],
        dis_neg=pairs[~ya & yb],
    )


def build_pairs_knn(train: LabeledDataset, k: int) -> PairSets:
    """Pair every example with its k nearest same-class and other-class neighbours.

    Neighbours are found by exact Euclidean search in the input space, ties
    going to the lower index.  Counts are clamped to what each class offers.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    train.require_both_classes(1)
    y = train.labels
    if min(train.n_pos, train.n_neg) < 2:
        warnings.warn("a class has a single member; it gets dissimilar pairs only",
                      RuntimeWarning, stacklevel=2)

    d2 = pairwise_sq_distances(train.features, train.features)
    order = np.argsort(d2, axis=1, kind="stable")
    anchors, partners = [], []
    for i in range(train.n):
        row = order[i]
        same = row[(y[row] == y[i]) & (row != i)][:k]
        other = row[y[row] != y[i]][:k]
        anchors.append(np.full(len(same) + len(other), i, dtype=np.intp))
        partners.append(np.concatenate([same, other]))
    return route_pairs(y, np.concatenate(anchors), np.concatenate(partners))


def build_pairs_random(train: LabeledDataset, count: int, seed) -> PairSets:
    """Draw ``count`` ordered pairs of distinct indices uniformly at random."""
    train.require_binary()
    if train.n < 2:
        raise DatasetError("random pairs need at least two examples")
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    anchors = rng.integers(0, train.n, size=count)
    partners = rng.integers(0, train.n - 1, size=count)
    partners += partners >= anchors
    return route_pairs(train.labels, anchors, partners)
