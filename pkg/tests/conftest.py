import numpy as np
import pytest

from iml.dataset import LabeledDataset


def make_toy(n_pos=10, n_neg=30, d=2, shift=3.0, seed=0, name="toy"):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.standard_normal((n_pos, d)) + shift, rng.standard_normal((n_neg, d))])
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)].astype(np.int8)
    return LabeledDataset(X, y, name=name)


@pytest.fixture
def toy():
    return make_toy()


@pytest.fixture
def toy_csv_dir(tmp_path):
    """A tiny registry with one well-separated dataset."""
    ds = make_toy(n_pos=15, n_neg=35, shift=4.0, seed=3)
    lines = [",".join(f"{v:.17g}" for v in row) + ("," + ("P" if lab == 1 else "N"))
             for row, lab in zip(ds.features, ds.labels)]
    (tmp_path / "toy.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "registry.json").write_text(
        '{"datasets": {"toy": {"path": "toy.csv", "label_column": -1, "positive_labels": ["P"]}}}')
    return tmp_path


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
