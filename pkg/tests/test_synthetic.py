import numpy as np
import pytest

from bcx.dataset import CATEGORICAL, NUMERIC, Dataset, FeatureSpec
from bcx.errors import ConfigError
from bcx.models import AnalyticLogisticHandle
from bcx.synthetic import generate

from conftest import make_numeric_dataset, uniform_dataset


def mixed_dataset(freq_a=0.7, n=10):
    k = int(round(freq_a * n))
    specs = [
        FeatureSpec("f1", NUMERIC),
        FeatureSpec("c1", CATEGORICAL, levels=("a", "b")),
    ]
    return Dataset(
        specs,
        [np.linspace(0.0, 1.0, n), np.array([0] * k + [1] * (n - k))],
        np.arange(n) % 2,
        ["x", "y"],
    )


class MixedHandle(AnalyticLogisticHandle):
    def __init__(self, dataset):
        super(AnalyticLogisticHandle, self).__init__(dataset, 2)

    def _predict_encoded(self, num, cat):
        p1 = 1.0 / (1.0 + np.exp(-3.0 * (num[:, 0] - 0.5)))
        return np.column_stack([1.0 - p1, p1])


def test_pool_size_and_labels():
    ds = uniform_dataset(2, n=50, seed=0)
    m = AnalyticLogisticHandle(ds, [1.0, 1.0], 0.0)
    pool = generate(ds, m, 500, seed=1)
    assert len(pool) == 500
    assert pool.probabilities.shape == (500, 2)
    np.testing.assert_allclose(pool.probabilities.sum(axis=1), 1.0, atol=1e-9)


def test_values_within_training_bounds():
    ds = uniform_dataset(2, n=50, lo=-1.5, hi=2.5, seed=1)
    m = AnalyticLogisticHandle(ds, [1.0, -1.0], 0.0)
    pool = generate(ds, m, 2000, seed=2)
    mins, maxs, _, _ = ds.numeric_stats()
    assert np.all(pool.num >= mins)
    assert np.all(pool.num <= maxs)


def test_seed_reproducibility():
    ds = mixed_dataset()
    m = MixedHandle(ds)
    a = generate(ds, m, 300, seed=9)
    b = generate(ds, m, 300, seed=9)
    np.testing.assert_array_equal(a.num, b.num)
    np.testing.assert_array_equal(a.cat, b.cat)
    np.testing.assert_array_equal(a.probabilities, b.probabilities)
    c = generate(ds, m, 300, seed=10)
    assert not np.array_equal(a.num, c.num)


def test_degenerate_numeric_range():
    ds = make_numeric_dataset([[5.0, 5.0, 5.0]], labels=[0, 1, 0])
    m = AnalyticLogisticHandle(ds, [1.0], -5.0)
    pool = generate(ds, m, 100, seed=0)
    assert np.all(pool.num == 5.0)


def test_degenerate_categorical_distribution():
    specs = [
        FeatureSpec("f1", NUMERIC),
        FeatureSpec("c1", CATEGORICAL, levels=("a", "b")),
    ]
    ds = Dataset(specs, [np.array([0.0, 1.0]), np.array([0, 0])], [0, 1], ["x", "y"])
    pool = generate(ds, MixedHandle(ds), 200, seed=3)
    assert np.all(pool.cat == 0)  # frequency of 'a' is 1.0


def test_numeric_marginals_roughly_uniform():
    ds = uniform_dataset(2, n=100, lo=0.0, hi=1.0, seed=4)
    m = AnalyticLogisticHandle(ds, [1.0, 0.0], 0.0)
    pool = generate(ds, m, 10000, seed=5)
    for j, fi in enumerate(ds.numeric_indices):
        spec = ds.features[fi]
        edges = np.linspace(spec.train_min, spec.train_max, 11)
        counts, _ = np.histogram(pool.num[:, j], bins=edges)
        shares = counts / len(pool)
        assert np.all(np.abs(shares - 0.1) <= 0.02)


def test_categorical_shares_match_frequencies():
    ds = mixed_dataset(freq_a=0.7, n=10)
    pool = generate(ds, MixedHandle(ds), 10000, seed=6)
    share_a = float(np.mean(pool.cat[:, 0] == 0))
    assert share_a == pytest.approx(0.7, abs=0.02)


def test_count_validation():
    ds = uniform_dataset(1, n=10, seed=7)
    m = AnalyticLogisticHandle(ds, [1.0], 0.0)
    with pytest.raises(ConfigError):
        generate(ds, m, 0, seed=0)


def test_csv_export(tmp_path):
    ds = mixed_dataset()
    pool = generate(ds, MixedHandle(ds), 20, seed=8)
    path = tmp_path / "pool.csv"
    pool.to_csv(str(path))
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "f1,c1,p_x,p_y"
    assert len(lines) == 21
