"""Imbalance-aware Mahalanobis metric learning for k-nearest-neighbour classification."""
from .dataset import (LabeledDataset, SplitSpec, binarize_labels, load_builtin, load_csv,
                      normalize_zscore, stratified_split)
from .evaluation import ConfusionCounts, EvalReport, cross_validate, f1, sample_hp_combinations
from .harness import ExperimentConfig, Method, Preprocess, run_benchmark, run_sweep
from .knn import KnnModel, knn_predict
from .metric import ProjectionMatrix
from .objective import HyperParams, PairStrategy, Weighting, gradient, objective
from .pairs import PairSets, build_pairs_knn, build_pairs_random
from .resample import ImbalanceTarget, make_imbalance_variant, random_under_sample, smote
from .solver import SolverOptions, fit_iml, fit_metric, minimize

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset", "SplitSpec", "binarize_labels", "load_builtin", "load_csv",
    "normalize_zscore", "stratified_split", "ConfusionCounts", "EvalReport", "cross_validate",
    "f1", "sample_hp_combinations", "ExperimentConfig", "Method", "Preprocess", "run_benchmark",
    "run_sweep", "KnnModel", "knn_predict", "ProjectionMatrix", "HyperParams", "PairStrategy",
    "Weighting", "gradient", "objective", "PairSets", "build_pairs_knn", "build_pairs_random",
    "ImbalanceTarget", "make_imbalance_variant", "random_under_sample", "smote", "SolverOptions",
    "fit_iml", "fit_metric", "minimize",
]
