"""Classification metrics, hyperparameter sampling, cross-validation, reports."""
from __future__ import annotations

import csv
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .dataset import NEGATIVE, POSITIVE, LabeledDataset, stratified_folds
from .knn import KnnModel, knn_predict
from .metric import ProjectionMatrix
from .objective import HyperParams, PairStrategy, Weighting
from .pairs import PairSets
from .solver import SolverOptions, build_pairs, fit_metric

Resampler = Callable[[LabeledDataset, int], LabeledDataset]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp else 0.0

    @property
    def f1(self) -> float:
        return f1(self)

    @property
    def accuracy(self) -> float:
        return accuracy(self)


def confusion(y_true, y_pred) -> ConfusionCounts:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("y_true and y_pred must be 1-d with equal length")
    for y in (y_true, y_pred):
        if not np.all(np.isin(y, (NEGATIVE, POSITIVE))):
            raise ValueError("labels must be -1 or +1")
    t, p = y_true == POSITIVE, y_pred == POSITIVE
    return ConfusionCounts(
        tp=int(np.sum(t & p)), fp=int(np.sum(~t & p)),
        fn=int(np.sum(t & ~p)), tn=int(np.sum(~t & ~p)),
    )


def f1(c: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall; 0 when there is no true positive."""
    if c.tp == 0:
        return 0.0
    return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn)


def accuracy(c: ConfusionCounts) -> float:
    return (c.tp + c.tn) / c.total if c.total else 0.0


def evaluate_projection(L: ProjectionMatrix, train: LabeledDataset, test: LabeledDataset,
                        k: int = 3) -> ConfusionCounts:
    """kNN on ``test`` using ``train`` as reference set, both projected by L."""
    model = KnnModel.fit(L, train.features, train.labels, k)
    return confusion(test.labels, knn_predict(model, L, test.features))


# ---------------------------------------------------------------------------
# hyperparameter search

DEFAULT_GRID: dict[str, tuple] = {
    "margin": (1.0, 10.0, 100.0, 1000.0, 10000.0),
    "lam": (0.0, 0.01, 0.1, 1.0, 10.0),
    "a": tuple(round(0.05 * i, 2) for i in range(21)),
}


def sample_hp_combinations(grid: Mapping[str, Sequence] | None = None, count: int = 100,
                           seed=0, k: int = 3,
                           weighting: Weighting = Weighting.BALANCED,
                           pair_strategy: PairStrategy = PairStrategy.KNN) -> list[HyperParams]:
    """Draw ``count`` distinct (margin, lam, a) combinations from the grid."""
    grid = DEFAULT_GRID if grid is None else grid
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be nonempty")
    combos = list(itertools.product(grid["margin"], grid["lam"], grid["a"]))
    if count > len(combos):
        raise ValueError(f"asked for {count} combinations, grid has {len(combos)}")
    if count < 1:
        raise ValueError("count must be positive")
    picks = np.random.default_rng(seed).permutation(len(combos))[:count]
    return [HyperParams(margin=float(m), lam=float(l), a=float(a), k=k,
                        weighting=weighting, pair_strategy=pair_strategy)
            for m, l, a in (combos[i] for i in picks)]


def cross_validation_scores(train: LabeledDataset, candidates: Sequence[HyperParams],
                            folds: int = 5, seed=0, options: SolverOptions | None = None,
                            resample: Resampler | None = None) -> np.ndarray:
    """Mean validation F1 of each candidate over stratified folds."""
    if not candidates:
        raise ValueError("no candidates")
    fold_index = stratified_folds(train, folds, np.random.default_rng([*_seed_list(seed), 1]))
    scores = np.zeros(len(candidates))
    everything = np.arange(train.n)
    for f, val_idx in enumerate(fold_index):
        fit_part = train.subset(np.setdiff1d(everything, val_idx))
        val_part = train.subset(val_idx)
        if resample is not None:
            fit_part = resample(fit_part, _child_seed(seed, 3, f))
        pair_cache: dict[tuple, PairSets] = {}
        for c, hp in enumerate(candidates):
            key = (hp.pair_strategy, hp.k)
            if key not in pair_cache:
                pair_cache[key] = build_pairs(fit_part, hp, seed=[*_seed_list(seed), 2, f])
            L = fit_metric(fit_part, hp, options, pairs=pair_cache[key]).L
            scores[c] += f1(evaluate_projection(L, fit_part, val_part, hp.k))
    return scores / folds


def cross_validate(train: LabeledDataset, candidates: Sequence[HyperParams], folds: int = 5,
                   seed=0, options: SolverOptions | None = None,
                   resample: Resampler | None = None) -> HyperParams:
    """Candidate with the best mean validation F1; ties go to the earlier one."""
    if len(candidates) == 1:
        return candidates[0]
    scores = cross_validation_scores(train, candidates, folds, seed, options, resample)
    return candidates[int(np.argmax(scores))]


def _child_seed(seed, *tags) -> int:
    return int(np.random.SeedSequence([*_seed_list(seed), *tags]).generate_state(1)[0])


def _seed_list(seed) -> list[int]:
    if isinstance(seed, (list, tuple)):
        return [int(s) for s in seed]
    if isinstance(seed, np.random.SeedSequence):
        return [int(s) for s in seed.generate_state(2)]
    return [int(seed)]


# ---------------------------------------------------------------------------
# reports

@dataclass
class SplitRecord:
    split: int
    seed: int
    f1: float
    accuracy: float
    confusion: ConfusionCounts
    hyperparams: HyperParams | None = None
    fit_seconds: float = 0.0

    def row(self) -> dict:
        hp = self.hyperparams
        return {
            "split": self.split, "seed": self.seed,
            "margin": "" if hp is None else hp.margin,
            "lam": "" if hp is None else hp.lam,
            "a": "" if hp is None else hp.a,
            "k": "" if hp is None else hp.k,
            "f1": repr(self.f1), "accuracy": repr(self.accuracy),
            **asdict(self.confusion),
            "fit_seconds": f"{self.fit_seconds:.3f}",
        }


@dataclass
class EvalReport:
    dataset: str
    method: str
    preprocess: str = "none"
    records: list[SplitRecord] = field(default_factory=list)

    def _values(self, attr):
        return np.array([getattr(r, attr) for r in self.records], dtype=float)

    @property
    def f1_mean(self) -> float:
        return float(self._values("f1").mean()) if self.records else math.nan

    @property
    def f1_std(self) -> float:
        return float(self._values("f1").std()) if self.records else math.nan

    @property
    def accuracy_mean(self) -> float:
        return float(self._values("accuracy").mean()) if self.records else math.nan

    @property
    def accuracy_std(self) -> float:
        return float(self._values("accuracy").std()) if self.records else math.nan

    def to_csv(self, path: str | Path) -> None:
        rows = [r.row() for r in self.records]
        fields = list(SplitRecord(0, 0, 0.0, 0.0, ConfusionCounts()).row())
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)

    def to_json(self, path: str | Path) -> None:
        doc = {
            "dataset": self.dataset, "method": self.method, "preprocess": self.preprocess,
            "f1_mean": self.f1_mean, "f1_std": self.f1_std,
            "accuracy_mean": self.accuracy_mean, "accuracy_std": self.accuracy_std,
            "splits": [
                {**r.row(), "hyperparams": None if r.hyperparams is None else r.hyperparams.as_dict()}
                for r in self.records
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start
