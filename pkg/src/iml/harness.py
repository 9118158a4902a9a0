"""Benchmark and imbalance-sweep experiments over registered datasets."""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import (LabeledDataset, SplitSpec, builtin_registry_path, derive_seed,
                      load_registry, normalize_zscore, stratified_split)
from .evaluation import (DEFAULT_GRID, EvalReport, SplitRecord, cross_validate,
                         evaluate_projection, sample_hp_combinations)
from .metric import ProjectionMatrix
from .objective import HyperParams, PairStrategy, Weighting
from .resample import ImbalanceTarget, make_imbalance_variant, random_under_sample, smote
from .solver import SolverOptions, fit_metric

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.50, 0.40, 0.30, 0.20, 0.10, 0.05, 0.04, 0.03, 0.02, 0.01)


class Method(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    IML = "iml"
    ML2 = "ml2"
    ML1 = "ml1"

    @property
    def learns(self) -> bool:
        return self is not Method.EUCLIDEAN

    @property
    def weighting(self) -> Weighting:
        return Weighting.BALANCED if self is Method.IML else Weighting.UNWEIGHTED

    @property
    def pair_strategy(self) -> PairStrategy:
        return PairStrategy.RANDOM if self is Method.ML1 else PairStrategy.KNN


class Preprocess(str, enum.Enum):
    NONE = "none"
    SMOTE = "smote"
    RUS = "rus"

    def apply(self, train: LabeledDataset, seed) -> LabeledDataset:
        if self is Preprocess.SMOTE:
            return smote(train, seed)
        if self is Preprocess.RUS:
            return random_under_sample(train, seed)
        return train

    @property
    def resampler(self):
        return None if self is Preprocess.NONE else self.apply


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...]
    methods: tuple[Method, ...] = (Method.EUCLIDEAN, Method.IML)
    preprocess: Preprocess = Preprocess.NONE
    registry: Path = field(default_factory=builtin_registry_path)
    seed: int = 0
    splits: int = 20
    train_fraction: float = 0.3
    folds: int = 5
    candidates: int = 100
    k: int = 3
    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    sweep_fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    sweep_train_fraction: float = 0.5
    min_minority: int = 20
    out: Path = Path("results")
    jobs: int = 1
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "preprocess", Preprocess(self.preprocess))
        object.__setattr__(self, "registry", Path(self.registry))
        object.__setattr__(self, "out", Path(self.out))
        object.__setattr__(self, "sweep_fractions", tuple(float(f) for f in self.sweep_fractions))
        if not self.datasets:
            raise ValueError("no datasets configured")
        if not self.methods:
            raise ValueError("no methods configured")
        if self.splits < 1 or self.folds < 2 or self.jobs < 1:
            raise ValueError("splits, folds and jobs must be positive (folds >= 2)")
        bad = [f for f in self.sweep_fractions if not 0 < f <= 1]
        if bad:
            raise ValueError(f"sweep fractions out of range: {bad}")

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        path = Path(path)
        doc = json.loads(path.read_text())
        if "registry" in doc:
            doc["registry"] = (path.parent / doc["registry"]).resolve()
        if "solver" in doc:
            doc["solver"] = SolverOptions(**doc["solver"])
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


@dataclass(frozen=True)
class SplitJob:
    dataset: LabeledDataset
    method: Method
    repeat: int
    train_fraction: float
    base_seed: int


def _dataset_seed(master: int, name: str) -> int:
    return int(derive_seed(master, name).generate_state(1)[0])


def _candidates(cfg: ExperimentConfig, method: Method, base_seed: int, repeat: int):
    return sample_hp_combinations(cfg.grid, cfg.candidates, seed=[base_seed, repeat, 7], k=cfg.k,
                                  weighting=method.weighting, pair_strategy=method.pair_strategy)


def run_split(cfg: ExperimentConfig, job: SplitJob) -> SplitRecord:
    """Split, standardize, optionally resample, tune, fit and score one repeat.

    Every seed depends only on (dataset, master seed, repeat); neither the
    method nor the preprocessing mode influences splits or folds.
    """
    spec = SplitSpec(job.train_fraction, cfg.splits, job.base_seed)
    train, test = stratified_split(job.dataset, spec, job.repeat)
    train, scaler = normalize_zscore(train)
    test = scaler.transform(test)
    fit_train = cfg.preprocess.apply(train, [job.base_seed, job.repeat, 11])

    start = time.perf_counter()
    hp: HyperParams | None = None
    if job.method.learns:
        candidates = _candidates(cfg, job.method, job.base_seed, job.repeat)
        hp = cross_validate(train, candidates, cfg.folds, seed=[job.base_seed, job.repeat],
                            options=cfg.solver, resample=cfg.preprocess.resampler)
        L = fit_metric(fit_train, hp, cfg.solver, seed=[job.base_seed, job.repeat, 13]).L
    else:
        L = ProjectionMatrix.identity(train.d)
    seconds = time.perf_counter() - start
    counts = evaluate_projection(L, fit_train, test, cfg.k)
    return SplitRecord(split=job.repeat, seed=job.base_seed, f1=counts.f1,
                       accuracy=counts.accuracy, confusion=counts, hyperparams=hp,
                       fit_seconds=seconds)


def _run_jobs(cfg: ExperimentConfig, jobs: Sequence[SplitJob]) -> list[SplitRecord]:
    if cfg.jobs == 1 or len(jobs) < 2:
        return [run_split(cfg, job) for job in jobs]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(run_split, [cfg] * len(jobs), jobs))


def _load_datasets(cfg: ExperimentConfig) -> tuple[dict[str, LabeledDataset], dict[str, str]]:
    loaded, errors = {}, {}
    try:
        registry = load_registry(cfg.registry)
    except (OSError, ValueError) as exc:
        return {}, {name: f"registry: {exc}" for name in cfg.datasets}
    for name in cfg.datasets:
        try:
            if name not in registry:
                raise ValueError(f"{name!r} is not in {cfg.registry}")
            loaded[name] = registry[name].load()
        except (OSError, ValueError) as exc:
            log.error("dataset %s: %s", name, exc)
            errors[name] = str(exc)
    return loaded, errors


def _fmt(x: float) -> str:
    return "" if x is None or math.isnan(x) else f"{100 * x:.4f}"


def run_benchmark(cfg: ExperimentConfig) -> dict[tuple[str, str], EvalReport]:
    """Repeated stratified splits with per-split tuning for every dataset x method.

    Writes ``<dataset>_<method>_<preprocess>.csv`` per pair and a
    ``summary.csv`` with one row per dataset and mean/std F1 (in percent)
    per method, plus a final row averaging over datasets.
    """
    cfg.out.mkdir(parents=True, exist_ok=True)
    datasets, errors = _load_datasets(cfg)
    reports: dict[tuple[str, str], EvalReport] = {}
    for name, ds in datasets.items():
        base_seed = _dataset_seed(cfg.seed, name)
        for method in cfg.methods:
            jobs = [SplitJob(ds, method, r, cfg.train_fraction, base_seed) for r in range(cfg.splits)]
            try:
                records = _run_jobs(cfg, jobs)
            except (ValueError, FloatingPointError) as exc:
                log.error("dataset %s / %s failed: %s", name, method.value, exc)
                errors[name] = f"{method.value}: {exc}"
                continue
            report = EvalReport(name, method.value, cfg.preprocess.value, records)
            report.to_csv(cfg.out / f"{name}_{method.value}_{cfg.preprocess.value}.csv")
            reports[(name, method.value)] = report
            log.info(json.dumps({"event": "report", "dataset": name, "method": method.value,
                                 "f1_mean": report.f1_mean, "f1_std": report.f1_std}))
    _write_summary(cfg, reports, errors)
    return reports


def _write_summary(cfg, reports, errors) -> None:
    fields = ["dataset"]
    for m in cfg.methods:
        fields += [f"{m.value}_f1_mean", f"{m.value}_f1_std"]
    fields.append("error")
    rows = []
    for name in cfg.datasets:
        row = {"dataset": name, "error": errors.get(name, "")}
        for m in cfg.methods:
            rep = reports.get((name, m.value))
            row[f"{m.value}_f1_mean"] = _fmt(rep.f1_mean) if rep else ""
            row[f"{m.value}_f1_std"] = _fmt(rep.f1_std) if rep else ""
        rows.append(row)
    mean_row = {"dataset": "Mean", "error": ""}
    for m in cfg.methods:
        reps = [reports[(n, m.value)] for n in cfg.datasets if (n, m.value) in reports]
        mean_row[f"{m.value}_f1_mean"] = _fmt(np.mean([r.f1_mean for r in reps])) if reps else ""
        mean_row[f"{m.value}_f1_std"] = _fmt(np.mean([r.f1_std for r in reps])) if reps else ""
    rows.append(mean_row)
    with open(cfg.out / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    """F1 and accuracy as the minority fraction is pushed through ``sweep_fractions``.

    Each repeat re-draws the under-sampled variant and its split.  Fractions
    whose variant would keep fewer than ``min_minority`` positives are
    skipped.  Writes ``sweep.csv`` in long format
    (dataset, fraction, method, metric, mean, std, repeats).
    """
    cfg.out.mkdir(parents=True, exist_ok=True)
    datasets, errors = _load_datasets(cfg)
    rows: list[dict] = []
    split_rows: list[dict] = []
    for name, ds in datasets.items():
        base_seed = _dataset_seed(cfg.seed, name)
        for fi, fraction in enumerate(cfg.sweep_fractions):
            target = ImbalanceTarget(fraction, cfg.min_minority)
            variants = []
            for r in range(cfg.splits):
                v = make_imbalance_variant(ds, target, [base_seed, r, 17, fi])
                if v is None:
                    break
                variants.append(v)
            if len(variants) < cfg.splits:
                log.info(json.dumps({"event": "skip", "dataset": name, "fraction": fraction}))
                continue
            for method in cfg.methods:
                jobs = [SplitJob(v, method, r, cfg.sweep_train_fraction, base_seed)
                        for r, v in enumerate(variants)]
                try:
                    records = _run_jobs(cfg, jobs)
                except (ValueError, FloatingPointError) as exc:
                    log.error("dataset %s / %s / %s failed: %s", name, fraction, method.value, exc)
                    errors[name] = str(exc)
                    continue
                for rec in records:
                    split_rows.append({"dataset": name, "fraction": fraction,
                                       "method": method.value, "split": rec.split,
                                       "f1": repr(rec.f1), "accuracy": repr(rec.accuracy)})
                for metric in ("f1", "accuracy"):
                    values = np.array([getattr(rec, metric) for rec in records])
                    rows.append({"dataset": name, "fraction": fraction, "method": method.value,
                                 "metric": metric, "mean": repr(float(values.mean())),
                                 "std": repr(float(values.std())), "repeats": len(values)})
    _write_rows(cfg.out / "sweep.csv", rows,
                ["dataset", "fraction", "method", "metric", "mean", "std", "repeats"])
    _write_rows(cfg.out / "sweep_splits.csv", split_rows,
                ["dataset", "fraction", "method", "split", "f1", "accuracy"])
    if errors:
        (cfg.out / "errors.json").write_text(json.dumps(errors, indent=2) + "\n")
    return rows


def _write_rows(path: Path, rows: list[dict], fields: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
