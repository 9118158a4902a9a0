"""Hinge-loss pairwise objective over the projection L and its gradient.

For a pair with difference ``delta`` and squared distance
``s = ||L delta||^2`` the similar-pair loss is ``[s - 1]_+`` and the
dissimilar-pair loss is ``[1 + m - s]_+``.  Each of the four pair sets is
weighted either by ``1 / (4 |set|)`` (balanced) or by 1 (unweighted), times
``a`` for similar sets and ``1 - a`` for dissimilar sets.  The regularizer is
``lam * ||L^T L - I||_F^2``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .metric import as_projection
from .pairs import PairSets


class Weighting(str, enum.Enum):
    BALANCED = "balanced"
    UNWEIGHTED = "unweighted"


class PairStrategy(str, enum.Enum):
    KNN = "knn"
    RANDOM = "random"


@dataclass(frozen=True)
class HyperParams:
    margin: float = 1.0
    lam: float = 0.0
    a: float = 0.5
    k: int = 3
    weighting: Weighting = Weighting.BALANCED
    pair_strategy: PairStrategy = PairStrategy.KNN

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be positive")
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        object.__setattr__(self, "pair_strategy", PairStrategy(self.pair_strategy))

    def as_dict(self) -> dict:
        return {"margin": self.margin, "lam": self.lam, "a": self.a, "k": self.k,
                "weighting": self.weighting.value, "pair_strategy": self.pair_strategy.value}


def loss_sim(L, x, x2) -> float:
    """Similar-pair hinge ``max(0, d^2 - 1)``."""
    return max(0.0, as_projection(L).sq_distance(x, x2) - 1.0)


def loss_dis(L, x, x2, m: float) -> float:
    """Dissimilar-pair hinge ``max(0, 1 + m - d^2)``."""
    if m < 0:
        raise ValueError("margin must be nonnegative")
    return max(0.0, 1.0 + m - as_projection(L).sq_distance(x, x2))


def set_weights(pairs: PairSets, hp: HyperParams) -> dict[str, float]:
    """Per-pair weight of each set; empty sets get weight 0."""
    out = {}
    for name, p in pairs.items():
        base = hp.a if name.startswith("sim") else 1.0 - hp.a
        if not len(p):
            out[name] = 0.0
        elif hp.weighting is Weighting.BALANCED:
            out[name] = base / (4.0 * len(p))
        else:
            out[name] = base
    return out


class PairObjective:
    """Objective and gradient for fixed pairs, features and hyperparameters.

    The pair differences are stacked once; each evaluation then costs two
    matrix products of size (pairs x d x d).
    """

    def __init__(self, pairs: PairSets, features: np.ndarray, hp: HyperParams):
        X = np.asarray(features, dtype=float)
        weights = set_weights(pairs, hp)
        deltas, w, sim = [], [], []
        for name, p in pairs.items():
            if not len(p) or weights[name] == 0.0:
                continue
            deltas.append(X[p[:, 0]] - X[p[:, 1]])
            w.append(np.full(len(p), weights[name]))
            sim.append(np.full(len(p), name.startswith("sim")))
        self.d = X.shape[1]
        self.hp = hp
        if deltas:
            self.delta = np.vstack(deltas)
            self.weight = np.concatenate(w)
            self.is_sim = np.concatenate(sim)
        else:
            self.delta = np.empty((0, self.d))
            self.weight = np.empty(0)
            self.is_sim = np.empty(0, dtype=bool)
        # hinge offsets: sim -> s - 1, dis -> (1 + m) - s
        self._sign = np.where(self.is_sim, 1.0, -1.0)
        self._offset = np.where(self.is_sim, -1.0, 1.0 + hp.margin)
        self._eye = np.eye(self.d)

    def _matrix(self, L) -> np.ndarray:
        L = np.asarray(L, dtype=float)
        if L.ndim == 1:
            L = L.reshape(-1, self.d)
        if L.shape[1] != self.d:
            raise ValueError(f"projection has {L.shape[1]} columns, data has {self.d}")
        return L

    def value_and_grad(self, L) -> tuple[float, np.ndarray]:
        L = self._matrix(L)
        M = L.T @ L
        s = np.einsum("pi,pi->p", self.delta @ M, self.delta)
        margin = self._sign * s + self._offset
        # strict inequality: the subgradient at the kink is taken as 0
        active = margin > 0.0
        value = float(np.dot(self.weight[active], margin[active]))
        coef = np.where(active, self.weight * self._sign, 0.0)
        G = self.delta.T @ (coef[:, None] * self.delta)
        lam = self.hp.lam
        if lam:
            R = M - self._eye
            value += lam * float(np.sum(R * R))
            G = G + 2.0 * lam * R
        return value, 2.0 * L @ G

    def value(self, L) -> float:
        return self.value_and_grad(L)[0]

    def grad(self, L) -> np.ndarray:
        return self.value_and_grad(L)[1]


def objective(L, pairs: PairSets, train: LabeledDataset, hp: HyperParams) -> float:
    """Weighted pairwise hinge objective plus ``lam * ||L^T L - I||_F^2``."""
    return PairObjective(pairs, train.features, hp).value(as_projection(L).matrix)


def gradient(L, pairs: PairSets, train: LabeledDataset, hp: HyperParams) -> np.ndarray:
    """Gradient of :func:`objective` with respect to L (same shape as L)."""
    return PairObjective(pairs, train.features, hp).grad(as_projection(L).matrix)
