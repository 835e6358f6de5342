import numpy as np
import pytest

from bcx.dataset import NUMERIC, Dataset, FeatureSpec
from bcx.models import AnalyticLogisticHandle
from bcx.surrogate import LOGISTIC, SurrogateModel, Term


def identity_spec(name, lo=-3.0, hi=6.0):
    """Numeric FeatureSpec with identity standardization (mean 0, stddev 1)."""
    return FeatureSpec(name, NUMERIC, train_min=lo, train_max=hi, mean=0.0, stddev=1.0)


def make_numeric_dataset(columns, names=None, labels=None, stats=None,
                         class_names=("c0", "c1")):
    """Dataset from raw numeric columns; labels default to alternating."""
    columns = [np.asarray(c, dtype=np.float64) for c in columns]
    n = len(columns[0])
    names = names or [f"f{i + 1}" for i in range(len(columns))]
    specs = [FeatureSpec(nm, NUMERIC) for nm in names]
    if labels is None:
        labels = np.arange(n) % len(class_names)
    return Dataset(specs, columns, labels, list(class_names), stats=stats)


def uniform_dataset(p, n=200, lo=-2.0, hi=2.0, seed=0, identity_stats=False):
    rng = np.random.default_rng(seed)
    cols = [rng.uniform(lo, hi, n) for _ in range(p)]
    stats = None
    if identity_stats:
        stats = [identity_spec(f"f{i + 1}", lo, hi) for i in range(p)]
    return make_numeric_dataset(cols, stats=stats)


@pytest.fixture
def two_feature_ds():
    return uniform_dataset(2, n=400, seed=42)


@pytest.fixture
def linear_handle(two_feature_ds):
    return AnalyticLogisticHandle(two_feature_ds, [2.0, -1.0], 0.0)


# -- worked-example fixtures ------------------------------------------------
#
# Both fixtures use identity standardization so raw and standardized values
# coincide; the numbers below are frozen from the logistic surrogate worked
# through by hand in tests/test_estimator.py (root selection) and
# tests/test_surrogate.py (re-expression).


def diabetes_schema_dataset():
    """Four-feature dataset (identity stats) for the worked-example models."""
    specs = [
        identity_spec("Glucose"),
        identity_spec("BloodPressure"),
        identity_spec("BMI"),
        identity_spec("Age"),
    ]
    cols = [np.array([0.0, 1.0]), np.array([0.0, 1.0]),
            np.array([0.0, 1.0]), np.array([0.0, 1.0])]
    return Dataset(specs, cols, [0, 1], ["neg", "pos"], stats=specs)


@pytest.fixture
def worked_example():
    """Logistic surrogate -0.8 + 1.73*Glucose + 0.25*BloodPressure - 0.31*Glucose^2
    centred at Glucose=0.537, BloodPressure=3.04."""
    ds = diabetes_schema_dataset()
    x = (0.537, 3.04, 0.0, 0.0)
    model = SurrogateModel(
        family=LOGISTIC,
        terms=[
            Term("linear", ("Glucose",)),
            Term("linear", ("BloodPressure",)),
            Term("quadratic", ("Glucose",)),
        ],
        coefficients=np.array([1.73, 0.25, -0.31]),
        intercept=-0.8,
        center=x,
        center_response=0.0,  # filled below
        centered=True,
        dataset=ds,
    )
    model.center_response = model.evaluate(x)
    return ds, x, model


@pytest.fixture
def simplify_example():
    """Full logistic surrogate whose re-expression over {Glucose, BMI} at x
    folds to 0.46 + 0.3*Glucose + 0.18*BMI - 0.05*BMI^2."""
    ds = diabetes_schema_dataset()
    x = (0.537, 0.8, -0.2, 0.5)
    model = SurrogateModel(
        family=LOGISTIC,
        terms=[
            Term("linear", ("Glucose",)),
            Term("linear", ("BMI",)),
            Term("quadratic", ("BMI",)),
            Term("linear", ("BloodPressure",)),
            Term("interaction", ("Glucose", "BloodPressure")),
            Term("interaction", ("BloodPressure", "Age")),
        ],
        coefficients=np.array([0.25, 0.18, -0.05, 0.25, 0.0625, 0.1]),
        intercept=0.22,
        center=x,
        center_response=0.0,
        centered=True,
        dataset=ds,
    )
    model.center_response = model.evaluate(x)
    return ds, x, model
