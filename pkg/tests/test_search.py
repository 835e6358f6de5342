import numpy as np
import pytest

from bcx.dataset import CATEGORICAL, NUMERIC, Dataset, FeatureSpec
from bcx.errors import SchemaError, TargetClassError
from bcx.models import AnalyticLogisticHandle, ClassifierHandle
from bcx.search import SearchConfig, find_b_perturbations, find_level_flips, search_grid

from conftest import identity_spec, make_numeric_dataset, uniform_dataset


def unit_range_ds():
    spec = FeatureSpec("f1", NUMERIC, train_min=0.0, train_max=1.0, mean=0.5, stddev=0.3)
    return make_numeric_dataset([[0.2, 0.8]], stats=[spec])


class TestSearchGrid:
    def test_outward_alternating_order(self):
        ds = unit_range_ds()
        assert search_grid((0.5,), "f1", ds, steps=4) == [0.25, 0.75, 0.0, 1.0]

    def test_at_lower_bound_only_upward(self):
        ds = unit_range_ds()
        grid = search_grid((0.0,), "f1", ds, steps=4)
        assert grid == [0.25, 0.5, 0.75, 1.0]

    def test_clipping_dedupes(self):
        ds = unit_range_ds()
        grid = search_grid((0.1,), "f1", ds, steps=4)
        assert grid[0] == pytest.approx(0.0)  # 0.1 - 0.25 clipped
        assert len(grid) == len(set(grid))
        assert all(0.0 <= v <= 1.0 for v in grid)

    def test_categorical_rejected(self):
        specs = [
            FeatureSpec("f1", NUMERIC),
            FeatureSpec("c1", CATEGORICAL, levels=("a", "b")),
        ]
        ds = Dataset(specs, [np.array([0.0, 1.0]), np.array([0, 1])], [0, 1], ["x", "y"])
        with pytest.raises(SchemaError):
            search_grid((0.5, "a"), "c1", ds, steps=4)

    def test_degenerate_range_empty(self):
        ds = make_numeric_dataset([[5.0, 5.0]], labels=[0, 1])
        assert search_grid((5.0,), "f1", ds, steps=10) == []


class TestFindBPerturbations:
    def test_sigmoid_boundary_at_zero(self):
        # p(class 1) = sigmoid(4 * f1); boundary at f1 = 0; from -0.5 delta is +0.5
        ds = uniform_dataset(1, n=100, lo=-2, hi=2, seed=0)
        m = AnalyticLogisticHandle(ds, [4.0], 0.0)
        x = (-0.5,)
        bps = find_b_perturbations(x, m, ds, target_class=1)
        assert len(bps) == 1
        bp = bps[0]
        assert bp.boundary_value == pytest.approx(0.0, abs=2e-3)
        assert bp.delta == pytest.approx(0.5, abs=2e-3)
        assert bp.feasible

    def test_worked_boundary_crossing(self):
        # boundary placed at Glucose = -0.020; from 0.537 the change is -0.557
        specs = [identity_spec("Glucose", lo=-3, hi=3)]
        ds = make_numeric_dataset([[0.0, 1.0]], names=["Glucose"], stats=specs)
        m = AnalyticLogisticHandle(ds, [-5.0], 5.0 * -0.020)
        x = (0.537,)
        bps = find_b_perturbations(x, m, ds, target_class=1)
        assert len(bps) == 1
        assert bps[0].boundary_value == pytest.approx(-0.020, abs=1e-3)
        assert bps[0].delta == pytest.approx(-0.557, abs=1e-3)

    def test_irrelevant_feature_absent(self):
        ds = uniform_dataset(2, n=100, seed=1)
        m = AnalyticLogisticHandle(ds, [4.0, 0.0], 0.0)  # f2 never flips
        bps = find_b_perturbations((-0.5, 0.3), m, ds, target_class=1)
        assert [bp.feature for bp in bps] == ["f1"]

    def test_already_target_class_rejected(self):
        ds = uniform_dataset(1, n=100, seed=2)
        m = AnalyticLogisticHandle(ds, [4.0], 0.0)
        with pytest.raises(TargetClassError):
            find_b_perturbations((0.5,), m, ds, target_class=1)

    def test_counterfactual_point_differs_only_at_feature(self):
        ds = uniform_dataset(3, n=100, seed=3)
        m = AnalyticLogisticHandle(ds, [2.0, 1.0, -1.0], 0.0)
        x = (-0.5, -0.2, 0.4)
        for bp in find_b_perturbations(x, m, ds, target_class=1):
            fi = ds.feature_index(bp.feature)
            for j, (a, b) in enumerate(zip(x, bp.counterfactual_point)):
                if j == fi:
                    assert b == bp.boundary_value
                else:
                    assert a == b

    def test_delta_identity(self):
        ds = uniform_dataset(2, n=100, seed=4)
        m = AnalyticLogisticHandle(ds, [2.0, -1.5], 0.1)
        for bp in find_b_perturbations((-0.4, 0.2), m, ds, target_class=1):
            assert bp.delta == bp.boundary_value - bp.original_value  # exact

    def test_flip_correctness(self):
        ds = uniform_dataset(2, n=200, seed=5)
        m = AnalyticLogisticHandle(ds, [3.0, 2.0], -0.3)
        x = (-0.6, -0.4)
        for bp in find_b_perturbations(x, m, ds, target_class=1):
            p = m.predict_proba([bp.counterfactual_point])[0][1]
            assert p >= 0.5  # boundary value sits on the target side

    def test_minimality_against_grid_requery(self):
        ds = uniform_dataset(2, n=200, seed=6)
        m = AnalyticLogisticHandle(ds, [3.0, -2.0], 0.2)
        x = (-0.7, 0.5)
        cfg = SearchConfig(steps=50)
        for bp in find_b_perturbations(x, m, ds, target_class=1, cfg=cfg):
            grid = search_grid(x, bp.feature, ds, steps=50)
            lo, hi = sorted([bp.original_value, bp.boundary_value])
            between = [v for v in grid if lo < v < hi]
            fi = ds.feature_index(bp.feature)
            for v in between:
                obs = list(x)
                obs[fi] = v
                assert m.predict_proba([tuple(obs)])[0][1] < 0.5

    def test_symmetry_of_mirrored_observations(self):
        # sigmoid(w * f1) is symmetric about its boundary: deltas from x and
        # from the mirrored observation have opposite signs, equal magnitude
        ds = uniform_dataset(1, n=200, lo=-2, hi=2, seed=7)
        m = AnalyticLogisticHandle(ds, [3.0], 0.0)
        cfg = SearchConfig()
        (fwd,) = find_b_perturbations((-0.8,), m, ds, target_class=1, cfg=cfg)
        (bwd,) = find_b_perturbations((0.8,), m, ds, target_class=0, cfg=cfg)
        width = ds.feature("f1").range_width
        assert fwd.delta > 0 > bwd.delta
        assert abs(fwd.delta) - abs(bwd.delta) == pytest.approx(
            0.0, abs=2 * cfg.refine_tol * width
        )

    def test_search_back_from_counterfactual_recovers_boundary(self):
        ds = uniform_dataset(1, n=200, lo=-2, hi=2, seed=7)
        m = AnalyticLogisticHandle(ds, [3.0], 0.0)
        cfg = SearchConfig()
        (fwd,) = find_b_perturbations((-0.8,), m, ds, target_class=1, cfg=cfg)
        (back,) = find_b_perturbations(
            fwd.counterfactual_point, m, ds, target_class=0, cfg=cfg
        )
        width = ds.feature("f1").range_width
        assert back.delta < 0  # opposite direction
        assert back.boundary_value == pytest.approx(
            fwd.boundary_value, abs=2 * cfg.refine_tol * width
        )

    def test_bisection_tightens_with_tolerance(self):
        ds = uniform_dataset(1, n=100, lo=-2, hi=2, seed=8)
        m = AnalyticLogisticHandle(ds, [4.0], 0.0)
        coarse = find_b_perturbations((-0.5,), m, ds, 1, SearchConfig(refine_tol=1e-2))[0]
        fine = find_b_perturbations((-0.5,), m, ds, 1, SearchConfig(refine_tol=1e-5))[0]
        assert abs(fine.boundary_value) <= abs(coarse.boundary_value) + 1e-12
        assert abs(fine.boundary_value - 0.0) <= 1e-4


class StepHandle(ClassifierHandle):
    """p(class 1) = 1 when the first categorical level is 'b', else 0.1."""

    def __init__(self, dataset):
        super().__init__(dataset, 2)

    def _predict_encoded(self, num, cat):
        p1 = np.where(cat[:, 0] == 1, 0.9, 0.1)
        return np.column_stack([1.0 - p1, p1])


class TestLevelFlips:
    def _mixed_ds(self):
        specs = [
            FeatureSpec("f1", NUMERIC),
            FeatureSpec("c1", CATEGORICAL, levels=("a", "b", "c")),
        ]
        return Dataset(
            specs,
            [np.array([0.0, 1.0, 2.0]), np.array([0, 1, 2])],
            [0, 1, 0],
            ["x", "y"],
        )

    def test_flip_found(self):
        ds = self._mixed_ds()
        m = StepHandle(ds)
        flips = find_level_flips((0.5, "a"), m, ds, target_class=1)
        assert [(f.original_level, f.flipped_level) for f in flips] == [("a", "b")]

    def test_no_categorical_features_empty(self):
        ds = uniform_dataset(1, n=10, seed=9)
        m = AnalyticLogisticHandle(ds, [4.0], 0.0)
        assert find_level_flips((-0.5,), m, ds, target_class=1) == []
