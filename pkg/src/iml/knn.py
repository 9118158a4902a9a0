"""Brute-force k-nearest-neighbour classification in a projected space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NEGATIVE, POSITIVE
from .metric import ProjectionMatrix, as_projection, pairwise_sq_distances


@dataclass(frozen=True, eq=False)
class KnnModel:
    projected: np.ndarray
    labels: np.ndarray
    k: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.k > len(self.labels):
            raise ValueError(f"k={self.k} exceeds the {len(self.labels)} training points")

    @classmethod
    def fit(cls, L, features, labels, k: int = 3) -> "KnnModel":
        return cls(as_projection(L).project(features), np.asarray(labels), k)


def knn_predict(model: KnnModel, L: ProjectionMatrix, test_features) -> np.ndarray:
    """Majority label of the k nearest projected training points.

    Distance ties go to the lower training index; a tied vote (even k)
    resolves to the negative class.
    """
    Z = as_projection(L).project(test_features)
    if Z.shape[1] != model.projected.shape[1]:
        raise ValueError("test projection and model projection differ in dimension")
    if model.k > len(model.labels):
        raise ValueError("k exceeds the number of training points")
    d2 = pairwise_sq_distances(Z, model.projected)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
    votes = (model.labels[nearest] == POSITIVE).sum(axis=1)
    return np.where(2 * votes > model.k, POSITIVE, NEGATIVE).astype(np.int8)
