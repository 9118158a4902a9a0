import csv
import json

import numpy as np
import pytest

from iml import harness
from iml.cli import main
from iml.dataset import load_registry
from iml.harness import ExperimentConfig, Method, Preprocess, SplitJob, run_benchmark, run_split, run_sweep


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def small_config(registry_dir, out, **kw):
    base = dict(datasets=["toy"], registry=registry_dir / "registry.json", splits=2,
                candidates=3, out=out)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(datasets=["balance"])
        assert cfg.splits == 20 and cfg.folds == 5 and cfg.candidates == 100
        assert cfg.train_fraction == 0.3
        assert cfg.sweep_fractions == (0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.04, 0.03, 0.02, 0.01)

    @pytest.mark.parametrize("kw", [{"datasets": []}, {"methods": []}, {"splits": 0},
                                    {"sweep_fractions": [1.5]}, {"methods": ["lmnn"]}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**{"datasets": ["x"], **kw})

    def test_from_json_resolves_registry(self, toy_csv_dir, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"datasets": ["toy"], "registry": str(toy_csv_dir / "registry.json"),
                                    "methods": ["euclidean"], "solver": {"max_iterations": 50}}))
        cfg = ExperimentConfig.from_json(path, splits=3)
        assert cfg.splits == 3 and cfg.solver.max_iterations == 50
        assert cfg.methods == (Method.EUCLIDEAN,)

    def test_method_modes(self):
        assert Method.IML.weighting.value == "balanced"
        assert Method.ML2.weighting.value == "unweighted"
        assert Method.ML2.pair_strategy.value == "knn"
        assert Method.ML1.pair_strategy.value == "random"


class TestBenchmark:
    def test_euclidean_single_split(self, toy_csv_dir, tmp_path):
        cfg = small_config(toy_csv_dir, tmp_path, methods=["euclidean"], splits=1)
        reports = run_benchmark(cfg)
        (rep,) = reports.values()
        assert len(rep.records) == 1 and rep.records[0].hyperparams is None
        rows = read_csv(tmp_path / "toy_euclidean_none.csv")
        assert len(rows) == 1 and rows[0]["margin"] == ""

    def test_outputs_and_summary(self, toy_csv_dir, tmp_path):
        cfg = small_config(toy_csv_dir, tmp_path, preprocess="smote")
        run_benchmark(cfg)
        assert (tmp_path / "toy_iml_smote.csv").exists()
        rows = read_csv(tmp_path / "summary.csv")
        assert [r["dataset"] for r in rows] == ["toy", "Mean"]
        assert set(rows[0]) == {"dataset", "euclidean_f1_mean", "euclidean_f1_std",
                                "iml_f1_mean", "iml_f1_std", "error"}
        assert 0 <= float(rows[0]["iml_f1_mean"]) <= 100

    def test_missing_dataset_reported_not_fatal(self, toy_csv_dir, tmp_path):
        cfg = small_config(toy_csv_dir, tmp_path, datasets=["toy", "ghost"], methods=["euclidean"])
        reports = run_benchmark(cfg)
        rows = {r["dataset"]: r for r in read_csv(tmp_path / "summary.csv")}
        assert "ghost" in rows["ghost"]["error"]
        assert rows["toy"]["euclidean_f1_mean"] != ""
        assert list(reports) == [("toy", "euclidean")]

    def test_deterministic(self, toy_csv_dir, tmp_path):
        for name in ("a", "b"):
            run_benchmark(small_config(toy_csv_dir, tmp_path / name))
        assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()

    def test_parallel_matches_serial(self, toy_csv_dir, tmp_path):
        serial = run_benchmark(small_config(toy_csv_dir, tmp_path / "s"))
        parallel = run_benchmark(small_config(toy_csv_dir, tmp_path / "p", jobs=2))
        for key in serial:
            assert [r.f1 for r in serial[key].records] == [r.f1 for r in parallel[key].records]

    def test_splits_shared_across_preprocessing(self, toy_csv_dir, tmp_path, monkeypatch):
        seen = []
        original = harness.stratified_split

        def spy(ds, spec, repeat):
            train, test = original(ds, spec, repeat)
            seen.append(test.features.tobytes())
            return train, test

        monkeypatch.setattr(harness, "stratified_split", spy)
        for pre in ("none", "smote", "rus"):
            run_benchmark(small_config(toy_csv_dir, tmp_path / pre, methods=["euclidean"],
                                       preprocess=pre))
        assert seen[0:2] == seen[2:4] == seen[4:6]

    def test_cross_validation_never_sees_test_rows(self, toy_csv_dir, tmp_path, monkeypatch):
        calls = []
        original_cv = harness.cross_validate
        original_split = harness.stratified_split
        tests = []

        def split_spy(ds, spec, repeat):
            train, test = original_split(ds, spec, repeat)
            tests.append(test)
            return train, test

        def cv_spy(train, *args, **kwargs):
            calls.append(train)
            return original_cv(train, *args, **kwargs)

        monkeypatch.setattr(harness, "stratified_split", split_spy)
        monkeypatch.setattr(harness, "cross_validate", cv_spy)
        run_benchmark(small_config(toy_csv_dir, tmp_path, methods=["iml"]))
        registry = load_registry(toy_csv_dir / "registry.json")
        raw = registry["toy"].load()
        for train, test in zip(calls, tests):
            assert train.n + test.n == raw.n
            # standardized train rows are an affine image of raw rows; test rows never appear
            assert not set(map(bytes, test.features)) & set(map(bytes, train.features))


class TestRunSplit:
    def test_rus_and_smote_change_reference_set_only(self, toy_csv_dir):
        ds = load_registry(toy_csv_dir / "registry.json")["toy"].load()
        out = {}
        for pre in Preprocess:
            cfg = ExperimentConfig(datasets=["toy"], methods=["euclidean"], preprocess=pre)
            out[pre] = run_split(cfg, SplitJob(ds, Method.EUCLIDEAN, 0, 0.3, 5)).confusion
        totals = {c.total for c in out.values()}
        assert totals == {35}


class TestSweep:
    def test_long_format(self, toy_csv_dir, tmp_path):
        cfg = small_config(toy_csv_dir, tmp_path, methods=["euclidean", "iml"],
                           sweep_fractions=[0.3, 0.2, 0.1], min_minority=5, candidates=2)
        rows = run_sweep(cfg)
        table = read_csv(tmp_path / "sweep.csv")
        assert len(table) == len(rows)
        assert set(table[0]) == {"dataset", "fraction", "method", "metric", "mean", "std", "repeats"}
        # 0.1 of 35 negatives needs 4 positives (< min_minority), so it is skipped
        assert sorted({float(r["fraction"]) for r in table}) == [0.2, 0.3]
        assert {r["metric"] for r in table} == {"f1", "accuracy"}
        splits = read_csv(tmp_path / "sweep_splits.csv")
        assert len(splits) == 2 * 2 * 2


class TestCli:
    def test_benchmark(self, toy_csv_dir, tmp_path, capsys):
        code = main(["benchmark", "--registry", str(toy_csv_dir / "registry.json"),
                     "--datasets", "toy", "--methods", "euclidean", "--splits", "2",
                     "--out", str(tmp_path)])
        assert code == 0
        assert "summary.csv" in capsys.readouterr().out
        assert len(read_csv(tmp_path / "toy_euclidean_none.csv")) == 2

    def test_sweep_ablation(self, toy_csv_dir, tmp_path):
        main(["sweep", "--registry", str(toy_csv_dir / "registry.json"), "--datasets", "toy",
              "--splits", "1", "--candidates", "1", "--fractions", "0.3", "--min-minority", "5", "--ablation",
              "--out", str(tmp_path)])
        methods = {r["method"] for r in read_csv(tmp_path / "sweep.csv")}
        assert methods == {"iml", "ml2", "ml1"}

    def test_config_file(self, toy_csv_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"datasets": ["toy"], "methods": ["euclidean"], "splits": 1,
                                   "registry": str(toy_csv_dir / "registry.json")}))
        main(["benchmark", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert (tmp_path / "o" / "summary.csv").exists()

    def test_requires_datasets(self):
        with pytest.raises(SystemExit):
            main(["benchmark"])

    def test_bad_method(self):
        with pytest.raises(SystemExit):
            main(["benchmark", "--datasets", "wine", "--methods", "lmnn"])
