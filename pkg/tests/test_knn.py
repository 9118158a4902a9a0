import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iml.knn import KnnModel, knn_predict
from iml.metric import ProjectionMatrix


def predict(train, labels, test, k=3, L=None):
    train = np.asarray(train, dtype=float)
    L = ProjectionMatrix.identity(train.shape[1]) if L is None else L
    model = KnnModel.fit(L, train, np.asarray(labels, dtype=np.int8), k)
    return knn_predict(model, L, np.asarray(test, dtype=float))


class TestPredict:
    def test_exact_match_with_k1(self):
        train = [[0.0, 0], [1, 1], [2, 0]]
        assert list(predict(train, [-1, 1, -1], [[1, 1]], k=1)) == [1]

    def test_majority(self):
        assert list(predict([[0.0], [0.1], [0.2], [9]], [1, 1, -1, -1], [[0.05]])) == [1]

    def test_one_dimensional_example(self):
        # -2 and +2 are equidistant from 0; the neighbour set {-1, +1, +2}
        # arises when the positives are stored first
        train = [[1.0], [2], [3], [-2], [-1]]
        assert list(predict(train, [1, 1, 1, -1, -1], [[0.0]])) == [1]

    def test_one_dimensional_example_negatives_first(self):
        # with the negatives stored first the tie at distance 2 resolves to -2
        train = [[-2.0], [-1], [1], [2], [3]]
        assert list(predict(train, [-1, -1, 1, 1, 1], [[0.0]])) == [-1]

    def test_distance_tie_goes_to_lower_index(self):
        # both neighbours at distance 1; the lower index (label +1) wins with k = 1
        assert list(predict([[1.0], [-1.0]], [1, -1], [[0.0]], k=1)) == [1]
        assert list(predict([[1.0], [-1.0]], [-1, 1], [[0.0]], k=1)) == [-1]

    def test_vote_tie_goes_negative(self):
        assert list(predict([[0.0], [0.1], [5]], [1, -1, 1], [[0.0]], k=2)) == [-1]

    def test_learned_projection_changes_neighbours(self):
        train = [[0.0, 3], [1, 0], [1.1, 0], [1.2, 0]]
        labels = [1, -1, -1, -1]
        squash = ProjectionMatrix([[1.0, 0], [0, 0]])
        assert list(predict(train, labels, [[0, 0]], k=1)) == [-1]
        assert list(predict(train, labels, [[0, 0]], k=1, L=squash)) == [1]

    def test_k_larger_than_train(self):
        with pytest.raises(ValueError):
            KnnModel.fit(np.eye(1), np.zeros((2, 1)), np.array([1, -1]), k=3)

    def test_dimension_mismatch(self):
        model = KnnModel.fit(np.eye(2), np.zeros((3, 2)), np.array([1, -1, 1]), k=1)
        with pytest.raises(ValueError):
            knn_predict(model, np.eye(3), np.zeros((1, 3)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), angle=st.floats(0, 2 * np.pi))
    def test_rotation_invariance(self, seed, angle):
        rng = np.random.default_rng(seed)
        train = rng.standard_normal((25, 2))
        labels = np.where(rng.random(25) < 0.4, 1, -1)
        test = rng.standard_normal((10, 2))
        L = rng.standard_normal((2, 2))
        Q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        a = predict(train, labels, test, L=ProjectionMatrix(L))
        b = predict(train, labels, test, L=ProjectionMatrix(Q @ L))
        d2 = ((test @ L.T)[:, None, :] - (train @ L.T)[None]) ** 2
        d2 = d2.sum(-1)
        kth = np.sort(d2, axis=1)
        # rotations only perturb rounding, so skip points with near-tied neighbours
        clear = np.min(np.diff(kth[:, :4], axis=1), axis=1) > 1e-9
        np.testing.assert_array_equal(a[clear], b[clear])
