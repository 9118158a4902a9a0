import warnings

import numpy as np
import pytest

from iml.dataset import LabeledDataset
from iml.pairs import PairSets, build_pairs_knn, build_pairs_random, route_pairs


def dataset(X, y):
    return LabeledDataset(np.asarray(X, dtype=float), np.asarray(y, dtype=np.int8))


class TestKnnPairs:
    def test_one_dimensional_example(self):
        ds = dataset([[0], [1], [5], [20], [21], [22]], [1, 1, 1, -1, -1, -1])
        pairs = build_pairs_knn(ds, 1)
        assert {tuple(p) for p in pairs.sim_pos} == {(0, 1), (1, 0), (2, 1)}

    def test_total_is_2nk(self, toy):
        pairs = build_pairs_knn(toy, 3)
        assert len(pairs) == 2 * toy.n * 3
        pairs.validate(toy.labels)

    def test_clamping_with_two_positives(self):
        rng = np.random.default_rng(0)
        ds = dataset(rng.standard_normal((12, 2)), [1, 1] + [-1] * 10)
        pairs = build_pairs_knn(ds, 3)
        for i in (0, 1):
            assert np.sum(pairs.sim_pos[:, 0] == i) == 1
            assert np.sum(pairs.dis_pos[:, 0] == i) == 3
        assert pairs.sizes()["dis_neg"] == 10 * 2

    def test_single_positive_warns(self):
        ds = dataset(np.arange(6.0)[:, None], [1] + [-1] * 5)
        with pytest.warns(RuntimeWarning):
            pairs = build_pairs_knn(ds, 2)
        assert len(pairs.sim_pos) == 0

    def test_tie_breaking_prefers_lower_index(self):
        ds = dataset([[0], [1], [-1], [10], [11]], [1, 1, 1, -1, -1])
        pairs = build_pairs_knn(ds, 1)
        assert tuple(pairs.sim_pos[0]) == (0, 1)

    def test_deterministic(self, toy):
        assert build_pairs_knn(toy, 3) == build_pairs_knn(toy, 3)


class TestRandomPairs:
    def test_count(self):
        rng = np.random.default_rng(0)
        ds = dataset(rng.standard_normal((100, 2)), [1] * 20 + [-1] * 80)
        pairs = build_pairs_random(ds, 2 * 100 * 3, seed=5)
        assert len(pairs) == 600
        pairs.validate(ds.labels)

    def test_all_negative(self):
        ds = dataset(np.arange(10.0)[:, None], [-1] * 10)
        pairs = build_pairs_random(ds, 30, seed=0)
        assert pairs.sizes() == {"sim_pos": 0, "sim_neg": 30, "dis_pos": 0, "dis_neg": 0}

    def test_seeded(self, toy):
        assert build_pairs_random(toy, 50, 9) == build_pairs_random(toy, 50, 9)
        assert build_pairs_random(toy, 50, 9) != build_pairs_random(toy, 50, 10)

    def test_heavy_imbalance_may_lack_sim_pos(self):
        ds = dataset(np.arange(200.0)[:, None], [1] + [-1] * 199)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            pairs = build_pairs_random(ds, 50, seed=0)
        assert len(pairs.sim_pos) == 0


class TestRouting:
    def test_anchor_directed(self):
        y = np.array([1, -1, 1, -1], dtype=np.int8)
        pairs = route_pairs(y, [0, 1, 2, 3], [1, 2, 0, 1])
        assert [tuple(p) for p in pairs.dis_pos] == [(0, 1)]
        assert [tuple(p) for p in pairs.dis_neg] == [(1, 2)]
        assert [tuple(p) for p in pairs.sim_pos] == [(2, 0)]
        assert [tuple(p) for p in pairs.sim_neg] == [(3, 1)]

    def test_validate_catches_misrouting(self):
        y = np.array([1, -1], dtype=np.int8)
        bad = PairSets(sim_pos=[[0, 1]], sim_neg=[], dis_pos=[], dis_neg=[])
        with pytest.raises(ValueError):
            bad.validate(y)
