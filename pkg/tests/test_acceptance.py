"""Acceptance suite: one test per exit criterion, each printing a pass/fail line.

Run with:  pytest tests/test_acceptance.py -v -s

The oracle experiments use analytic handles whose decision boundaries are
known in closed form; the dataset experiments use the checked-in CSVs under
data/ with the built-in MLP. Pool sizes here are desk scale (20k) rather
than the engine default (50k) to keep the suite minutes long; every
tolerance is the criterion's own.
"""
import itertools
import json
import time

import numpy as np
import pytest

from bcx import (
    AnalyticCircleHandle,
    AnalyticLogisticHandle,
    BuiltinModelConfig,
    RunConfig,
    estimate_b_perturbation,
    explain_observation,
    fidelity_error,
    load_csv,
    load_schema,
    percent_fidelity,
    split,
    train_builtin,
)
from bcx.batch import lime_width_sweep, run_batch
from bcx.dataset import NUMERIC, Dataset, FeatureSpec
from bcx.errors import BandStarvationError, BcxError
from bcx.estimator import STATUS_OK, FidelityRecord
from bcx.explain import make_pool
from bcx.lime import WIDTH_SWEEP
from bcx.neighbourhood import balanced_neighbourhood, band_index
from bcx.search import BoundaryPerturbation
from bcx.surrogate import MULTIPLE, SurrogateModel, Term, evaluate, fit

from conftest import uniform_dataset
from test_surrogate import make_nbd


def report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def oracle_split(p, seed, n_train=400, n_test=60, lo=-2.0, hi=2.0, test_lo=-1.8, test_hi=1.8):
    """Uniform train rows (statistics source) plus a fresh test partition
    carrying the training statistics."""
    rng = np.random.default_rng(seed)
    specs = [FeatureSpec(f"f{i + 1}", NUMERIC) for i in range(p)]
    train = Dataset(
        specs, [rng.uniform(lo, hi, n_train) for _ in range(p)],
        np.arange(n_train) % 2, ["c0", "c1"],
    )
    test = Dataset(
        specs, [rng.uniform(test_lo, test_hi, n_test) for _ in range(p)],
        np.arange(n_test) % 2, ["c0", "c1"], stats=train.features,
    )
    return train, test


def load_bundle(name, test_fraction, epochs, model_seed=1):
    schema, label, classes = load_schema(f"data/{name}.schema")
    ds = load_csv(f"data/{name}.csv", schema, label, classes)
    train, test = split(ds, test_fraction, seed=0)
    model = train_builtin(
        train,
        BuiltinModelConfig(family="mlp_softmax", hidden_units=16,
                           epochs=epochs, learning_rate=0.5, seed=model_seed),
    )
    return train, test, model


def circle_handle(train, p):
    center = [0.3, -0.2, 0.1, 0.0, -0.1][:p]
    return AnalyticCircleHandle(train, center=center, radius=1.6, gain=8.0)


QUAD_CFG = dict(method="bcx", family="logistic", pool_size=20000, n_neighbourhood=200)


def test_worked_example_reproduction(worked_example):
    """Fixture regression solved for the boundary: root, delta, fidelity error."""
    t0 = time.perf_counter()
    ds, x, model = worked_example
    cf = (-0.020, x[1], x[2], x[3])
    actual = BoundaryPerturbation(
        feature="Glucose", target_class=1, original_value=0.537,
        boundary_value=-0.020, delta=-0.557, feasible=True, counterfactual_point=cf,
    )
    est = estimate_b_perturbation(model, actual, x, boundary=0.5)
    record = fidelity_error(actual, est, ds, T=0.25)
    elapsed = time.perf_counter() - t0
    ok = (
        est.status == STATUS_OK
        and abs(est.estimated_boundary_value - 0.023) < 1e-3
        and abs(est.estimated_delta - (-0.512)) <= 0.005
        and abs(record.error - 0.045) <= 0.005
        and elapsed < 1.0
    )
    report(
        "worked-example reproduction",
        ok,
        f"root={est.estimated_boundary_value:.4f} delta={est.estimated_delta:.4f} "
        f"error={record.error:.4f} ({elapsed * 1000:.0f} ms)",
    )


def test_linear_oracle():
    """Known logistic boundaries in 2-5 dims: fidelity >= 95%, errors <= 0.05."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    cfg = RunConfig(method="bcx", family="logistic", use_quadratic=False,
                    use_interaction=False, pool_size=20000)
    records, n_obs = [], 0
    for dim, quota in ((2, 13), (3, 13), (4, 13), (5, 11)):
        train, _ = oracle_split(dim, seed=dim)
        w = rng.uniform(0.5, 3.0, dim) * rng.choice([-1.0, 1.0], dim)
        m = AnalyticLogisticHandle(train, w, float(rng.uniform(-0.5, 0.5)))
        pool = make_pool(train, m, cfg, seed=dim)
        taken = 0
        while taken < quota:
            x = tuple(rng.uniform(-1.5, 1.5, dim))
            try:
                expls = explain_observation(train, m, x, cfg, seed=dim, pool=pool)
            except BcxError:
                continue
            taken += 1
            n_obs += 1
            records.extend(expls[0].records)
    fid = percent_fidelity(records, T=0.25)
    max_err = max(r.error for r in records)
    elapsed = time.perf_counter() - t0
    ok = fid >= 0.95 and max_err <= 0.05 and elapsed < 60.0 and n_obs == 50
    report(
        "linear oracle",
        ok,
        f"fidelity={fid:.3f} (>=0.95) max_error={max_err:.5f} (<=0.05) "
        f"over {n_obs} observations ({elapsed:.1f}s < 60s)",
    )


def test_quadratic_oracle():
    """Spherical boundary: quadratic config >= 80% and beats the linear-only
    config on the same seeds."""
    t0 = time.perf_counter()
    train, test = oracle_split(3, seed=11, n_test=25)
    m = circle_handle(train, 3)
    seeds = (21, 22)
    cfg_quad = RunConfig(test_count=25, seeds=seeds, **QUAD_CFG)
    cfg_lin = cfg_quad.with_overrides(use_quadratic=False, use_interaction=False)
    r_quad = run_batch(cfg_quad, train, test, m, keep_explanations=False)
    r_lin = run_batch(cfg_lin, train, test, m, keep_explanations=False)
    elapsed = time.perf_counter() - t0
    ok = (
        r_quad.fidelity_mean >= 0.80
        and r_quad.fidelity_mean > r_lin.fidelity_mean
        and elapsed < 120.0
    )
    report(
        "quadratic oracle",
        ok,
        f"quadratic={r_quad.fidelity_mean:.3f} (>=0.80) "
        f"linear-only={r_lin.fidelity_mean:.3f} (strictly below) "
        f"({elapsed:.1f}s < 120s)",
    )


def test_gap_over_lime_baseline():
    """On iris and the diabetes-style set, best-config fidelity beats the
    LIME baseline's best kernel width by >= 20 percentage points."""
    t0 = time.perf_counter()
    setups = (
        ("iris", 2 / 3, 800, "multiple"),
        ("diabetes", 0.2, 600, "logistic"),
    )
    seeds = (0, 1, 2, 3, 4)
    lines = []
    ok = True
    for name, tf, epochs, family in setups:
        train, test, m = load_bundle(name, tf, epochs)
        cfg = RunConfig(method="bcx", family=family,
                        use_counterfactual_augmentation=True,
                        test_count=100, seeds=seeds, pool_size=20000)
        ours = run_batch(cfg, train, test, m, keep_explanations=False)
        lime_cfg = RunConfig(method="lime", family="multiple", lime_samples=15000,
                             test_count=100, seeds=seeds, pool_size=20000)
        lime_results, best_width = lime_width_sweep(
            lime_cfg, train, test, m, widths=WIDTH_SWEEP
        )
        lime_best = lime_results[best_width].fidelity_mean
        gap = ours.fidelity_mean - lime_best
        ok = ok and gap >= 0.20
        lines.append(f"{name}: ours={ours.fidelity_mean:.3f} "
                     f"lime_best={lime_best:.3f} gap={gap:.3f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 900.0
    report("gap over the LIME baseline",
           ok, "; ".join(lines) + f" (>=0.20 each; {elapsed:.0f}s < 900s)")


def test_counterfactual_augmentation_direction():
    """Weight-10 augmentation never costs fidelity beyond one standard error,
    on the quadratic oracle and the diabetes-style set."""
    lines = []
    ok = True
    # quadratic oracle
    train, test = oracle_split(3, seed=11, n_test=25)
    m = circle_handle(train, 3)
    cfg = RunConfig(test_count=25, seeds=(21, 22, 23), **QUAD_CFG)
    plain = run_batch(cfg, train, test, m, keep_explanations=False)
    augmented = run_batch(cfg.with_overrides(use_counterfactual_augmentation=True),
                          train, test, m, keep_explanations=False)
    ok_oracle = augmented.fidelity_mean >= plain.fidelity_mean - plain.fidelity_stderr
    ok = ok and ok_oracle
    lines.append(f"oracle: {plain.fidelity_mean:.3f} -> {augmented.fidelity_mean:.3f}")
    # diabetes-style data
    train, test, m = load_bundle("diabetes", 0.2, 600)
    cfg = RunConfig(method="bcx", family="logistic", test_count=50,
                    seeds=(0, 1, 2), pool_size=20000)
    plain = run_batch(cfg, train, test, m, keep_explanations=False)
    augmented = run_batch(cfg.with_overrides(use_counterfactual_augmentation=True),
                          train, test, m, keep_explanations=False)
    ok_data = augmented.fidelity_mean >= plain.fidelity_mean - plain.fidelity_stderr
    ok = ok and ok_data
    lines.append(f"diabetes: {plain.fidelity_mean:.3f} -> {augmented.fidelity_mean:.3f}")
    report("counterfactual augmentation direction", ok,
           "; ".join(lines) + " (no drop beyond one standard error)")


def test_term_count_trend():
    """Mean fidelity over max_terms in {8, 11, 14} is non-decreasing."""
    train, test = oracle_split(5, seed=11, n_test=20)
    m = circle_handle(train, 5)
    means = []
    for mt in (8, 11, 14):
        cfg = RunConfig(test_count=20, seeds=(31, 32), max_terms=mt, **QUAD_CFG)
        r = run_batch(cfg, train, test, m, keep_explanations=False)
        means.append(r.fidelity_mean)
    ok = all(a <= b + 1e-12 for a, b in zip(means, means[1:]))
    report(
        "term-count trend",
        ok,
        "max_terms 8/11/14 -> " + "/".join(f"{v:.3f}" for v in means) + " (non-decreasing)",
    )


class TestPropertySuites:
    """Criterion: all property suites pass with zero failures."""

    def test_neighbourhood_properties_thousand_pools(self):
        from bcx.synthetic import SyntheticPool

        failures = 0
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            p = int(rng.integers(1, 4))
            ds = uniform_dataset(p, n=20, seed=seed)
            n_pool = int(rng.integers(30, 120))
            num = rng.uniform(-2, 2, size=(n_pool, p))
            responses = rng.uniform(0.001, 0.999, n_pool)
            probs = np.column_stack([1.0 - responses, responses])
            pool = SyntheticPool(ds, num, np.zeros((n_pool, 0), dtype=np.int64), probs, 0)
            x = tuple(rng.uniform(-2, 2, p))
            n = int(rng.integers(3, 16))
            try:
                nbd = balanced_neighbourhood(pool, x, 1, n=n)
            except BandStarvationError:
                continue
            edges = [(0.0, 0.4), (0.4, 0.6), (0.6, 1.0)]
            member_ok = all(
                edges[b][0] < r <= edges[b][1]
                for r, b in zip(nbd.responses, nbd.band_of)
            )
            z_pool = ds.standardize_numeric(pool.num)
            x_z = ds.standardize_numeric(ds.encode_batch([x])[0])[0]
            d2 = ((z_pool - x_z) ** 2).sum(axis=1)
            bands = band_index(responses, 0.4, 0.6)
            z_sel = ds.standardize_numeric(nbd.num)
            minimal = True
            for band in range(3):
                sel = np.sort(((z_sel[nbd.band_of == band] - x_z) ** 2).sum(axis=1))
                brute = np.sort(d2[bands == band])[: len(sel)]
                if not np.allclose(sel, brute, atol=1e-10):
                    minimal = False
            if not (member_ok and minimal):
                failures += 1
        report("property: neighbourhood membership+minimality",
               failures == 0, f"{failures} failures over 1000 random pools")

    def test_centering_every_fitted_model(self):
        failures = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            p = int(rng.integers(1, 4))
            ds = uniform_dataset(p, n=30, seed=seed)
            n = int(rng.integers(10, 60))
            nbd = make_nbd(ds, rng.uniform(-2, 2, (n, p)), rng.uniform(0.05, 0.95, n),
                           rng.choice([1.0, 10.0], n))
            x = tuple(rng.uniform(-2, 2, p))
            y_x = float(rng.uniform(0.1, 0.9))
            family = "multiple" if seed % 2 else "logistic"
            model = fit(nbd, x, y_x, family=family, max_terms=5)
            if abs(evaluate(model, x) - y_x) > 1e-9:
                failures += 1
        report("property: centering invariant", failures == 0,
               f"{failures} failures over 50 fitted models")

    def test_root_selection_minimality(self):
        ds = uniform_dataset(1, n=20, seed=0, identity_stats=True)
        x = (0.4,)
        bp = BoundaryPerturbation("f1", 1, 0.4, 0.1, -0.3, True, (0.1,))
        rng = np.random.default_rng(3)
        failures = 0
        for _ in range(200):
            a, b, c = rng.normal(size=3)
            model = SurrogateModel(
                family=MULTIPLE,
                terms=[Term("quadratic", ("f1",)), Term("linear", ("f1",))],
                coefficients=np.array([a, b]), intercept=c,
                center=x, center_response=0.0, centered=False, dataset=ds,
            )
            est = estimate_b_perturbation(model, bp, x, boundary=0.5)
            if est.status != STATUS_OK:
                continue
            best = min(abs(r - 0.4) for r in est.roots)
            if abs(est.estimated_boundary_value - 0.4) > best + 1e-12:
                failures += 1
        report("property: root-selection minimality", failures == 0,
               f"{failures} failures over 200 random quadratics")

    def test_percent_fidelity_monotone_in_threshold(self):
        rng = np.random.default_rng(4)
        records = [
            FidelityRecord("f", 1, 0.0, 0.0, float(e), True, False)
            for e in rng.uniform(0, 1, 100)
        ]
        values = [percent_fidelity(records, T=t) for t in np.linspace(0.01, 1.5, 40)]
        ok = all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
        report("property: percent fidelity monotone in T", ok,
               "40 thresholds, non-decreasing")

    def test_stepwise_matches_exhaustive(self):
        failures = 0
        for seed in range(200):
            rng = np.random.default_rng(seed + 777)
            n = int(rng.integers(6, 21))
            ds = uniform_dataset(3, n=30, seed=seed, identity_stats=True)
            num = rng.normal(size=(n, 3))
            num[:, 2] = 0.7 * num[:, 0] + 0.3 * num[:, 2]
            responses = num @ rng.normal(size=3) + 0.1 * rng.normal(size=n)
            weights = rng.uniform(0.5, 2.0, n)
            nbd = make_nbd(ds, num, responses, weights)
            x = (0.0, 0.0, 0.0)
            model = fit(nbd, x, 0.0, family=MULTIPLE,
                        use_quadratic=False, use_interaction=False)
            k = len(model.terms)
            if k == 0:
                continue
            pred = model.evaluate_batch(nbd.num, nbd.cat)
            rss = float(np.dot(weights, (responses - pred) ** 2))
            best = np.inf
            sw = np.sqrt(weights)
            for combo in itertools.combinations(range(3), k):
                sol, *_ = np.linalg.lstsq(num[:, combo] * sw[:, None],
                                          responses * sw, rcond=None)
                resid = responses - num[:, combo] @ sol
                best = min(best, float(np.dot(weights, resid**2)))
            if rss > best + 1e-9:
                failures += 1
        report("property: stepwise equals exhaustive best subset",
               failures == 0, f"{failures} failures over 200 instances (<=20 pts, <=3 terms)")

    def test_end_to_end_seed_determinism(self):
        train, _ = oracle_split(3, seed=5)
        m = AnalyticLogisticHandle(train, [2.0, -1.0, 0.5], 0.0)
        cfg = RunConfig(method="bcx", family="logistic", pool_size=5000,
                        n_neighbourhood=60)
        x = (-0.4, 0.3, 0.2)
        runs = []
        for _ in range(2):
            expls = explain_observation(train, m, x, cfg, seed=123)
            runs.append(json.dumps([e.to_dict() for e in expls], sort_keys=True))
        ok = runs[0] == runs[1]
        report("property: end-to-end seed determinism", ok,
               "identical payloads for identical seeds")
