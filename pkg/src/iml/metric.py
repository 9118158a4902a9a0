"""Mahalanobis metrics parameterized by a projection factor L (M = L^T L)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


class ProjectionMatrix:
    """An r x d projection ``L`` inducing the PSD metric ``M = L.T @ L``.

    The matrix is copied on construction and stored read-only.  Squared
    Mahalanobis distances under ``M`` equal squared Euclidean distances
    between projected points ``L x``, which is how they are computed here.
    """

    __slots__ = ("_L",)

    def __init__(self, matrix):
        L = np.array(matrix, dtype=float)
        if L.ndim != 2:
            raise ValueError(f"projection must be a 2-d matrix, got shape {L.shape}")
        if not np.all(np.isfinite(L)):
            raise ValueError("projection has non-finite entries")
        L.flags.writeable = False
        self._L = L

    @classmethod
    def identity(cls, d: int, rank: int | None = None) -> "ProjectionMatrix":
        """Identity initialization, optionally truncated to the first ``rank`` rows."""
        return cls(np.eye(d)[: d if rank is None else rank])

    @property
    def matrix(self) -> np.ndarray:
        return self._L

    @property
    def shape(self) -> tuple[int, int]:
        return self._L.shape

    @property
    def rank(self) -> int:
        return self._L.shape[0]

    @property
    def dim(self) -> int:
        return self._L.shape[1]

    @property
    def metric(self) -> np.ndarray:
        """The PSD matrix ``M = L^T L``."""
        return self._L.T @ self._L

    def __array__(self, dtype=None, copy=None):
        return self._L if dtype is None else self._L.astype(dtype)

    def __repr__(self):
        return f"ProjectionMatrix(shape={self.shape})"

    def __eq__(self, other):
        if not isinstance(other, ProjectionMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._L, other._L)

    __hash__ = None

    def project(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {X.shape[-1]}")
        return X @ self._L.T

    def sq_distance(self, x, x2) -> float:
        x = np.asarray(x, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if x.shape != (self.dim,) or x2.shape != (self.dim,):
            raise ValueError(f"expected two vectors of length {self.dim}")
        z = self._L @ (x - x2)
        return float(z @ z)

    def to_csv(self, path: str | Path) -> None:
        np.savetxt(path, self._L, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path: str | Path) -> "ProjectionMatrix":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))


def as_projection(L) -> ProjectionMatrix:
    return L if isinstance(L, ProjectionMatrix) else ProjectionMatrix(L)


def sq_distance(L, x, x2) -> float:
    """Squared Mahalanobis distance ``||L (x - x2)||^2``."""
    return as_projection(L).sq_distance(x, x2)


def project(L, X) -> np.ndarray:
    """Map each row ``x`` of ``X`` to ``L x``."""
    return as_projection(L).project(X)


def pairwise_sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances between rows of A and rows of B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.empty((A.shape[0], B.shape[0]))
    # bound the temporary to ~16 MB
    step = max(1, int(2_000_000 // max(1, B.shape[0] * A.shape[1])))
    for start in range(0, A.shape[0], step):
        diff = A[start:start + step, None, :] - B[None, :, :]
        out[start:start + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out
