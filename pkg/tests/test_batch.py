import json
import subprocess
import sys

import numpy as np
import pytest

from bcx import RunConfig, load_grid, load_run_config
from bcx.batch import FIGURE_GRID, ablate, report_csv, report_html, report_json, run_batch, write_report
from bcx.dataset import split
from bcx.errors import ConfigError
from bcx.models import AnalyticLogisticHandle

from conftest import uniform_dataset


def bundle(seed=0, n=300):
    ds = uniform_dataset(2, n=n, seed=seed)
    train, test = split(ds, 0.2, seed=0)
    m = AnalyticLogisticHandle(train, [2.0, -1.0], 0.0)
    return train, test, m


SMALL = dict(pool_size=4000, n_neighbourhood=60, family="logistic",
             use_quadratic=False, use_interaction=False)


class TestRunBatch:
    def test_minimal_batch(self):
        train, test, m = bundle()
        cfg = RunConfig(test_count=1, seeds=(0,), **SMALL)
        result = run_batch(cfg, train, test, m)
        assert len(result.per_seed) == 1
        assert result.per_seed[0].n_records >= 1
        assert 0.0 <= result.fidelity_mean <= 1.0
        assert result.fidelity_stderr == 0.0
        assert len(result.explanations) == 1

    def test_seed_aggregation(self):
        train, test, m = bundle()
        cfg = RunConfig(test_count=3, seeds=(0, 1, 2), **SMALL)
        result = run_batch(cfg, train, test, m)
        assert [s.seed for s in result.per_seed] == [0, 1, 2]
        fids = [s.fidelity for s in result.per_seed]
        assert result.fidelity_mean == pytest.approx(float(np.mean(fids)))
        expect_se = float(np.std(fids, ddof=1) / np.sqrt(3))
        assert result.fidelity_stderr == pytest.approx(expect_se)

    def test_oversized_test_count_rejected(self):
        train, test, m = bundle()
        cfg = RunConfig(test_count=10_000, seeds=(0,), **SMALL)
        with pytest.raises(Exception):
            run_batch(cfg, train, test, m)

    def test_report_bit_for_bit_reproducible(self):
        train, test, m = bundle()
        cfg = RunConfig(test_count=2, seeds=(0, 1), **SMALL)
        a = run_batch(cfg, train, test, m)
        b = run_batch(cfg, train, test, m)
        da, db = a.to_dict(), b.to_dict()
        del da["timing"], db["timing"]
        assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)

    def test_failures_collected_not_fatal(self):
        # a razor-thin boundary leaves the middle band empty in a small pool:
        # every observation fails with band starvation, the batch still ends
        train, test, _ = bundle()
        m = AnalyticLogisticHandle(train, [500.0, 0.0], 0.0)
        cfg = RunConfig(test_count=2, seeds=(0,), pool_size=300,
                        n_neighbourhood=30, family="logistic",
                        use_quadratic=False, use_interaction=False)
        result = run_batch(cfg, train, test, m)
        assert len(result.failures) == 2
        assert result.failures[0]["error_type"] == "BandStarvationError"
        assert result.fidelity_mean is None


@pytest.fixture(scope="module")
def result():
    train, test, m = bundle()
    cfg = RunConfig(test_count=2, seeds=(0,), **SMALL)
    return run_batch(cfg, train, test, m)


class TestReports:
    def test_json_round_trip(self, result, tmp_path):
        path = tmp_path / "report.json"
        write_report(result, "json", str(path))
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["schema_version"] == 1
        assert data["summary"]["fidelity_mean"] == result.fidelity_mean
        assert len(data["explanations"]) == 2

    def test_csv_one_row_per_record(self, result):
        text = report_csv(result)
        lines = text.strip().splitlines()
        n_records = sum(len(e["fidelity_records"]) for e in result.explanations)
        assert len(lines) == n_records + 1
        assert lines[0].startswith("seed,observation_index")

    def test_html_contains_equation(self, result):
        text = report_html(result)
        assert "<html>" in text
        assert result.explanations[0]["regression"]["equation"][:20] in text

    def test_json_excludes_explanations_on_request(self, result):
        data = json.loads(report_json(result, include_explanations=False))
        assert "explanations" not in data

    def test_unknown_format_rejected(self, result, tmp_path):
        with pytest.raises(Exception):
            write_report(result, "yaml", str(tmp_path / "x"))


class TestAblate:
    def test_grid_execution(self):
        train, test, m = bundle()
        cfg = RunConfig(test_count=2, seeds=(0,), **SMALL)
        grid = {
            "plain": {},
            "augmented": {"use_counterfactual_augmentation": True},
            "lime": {"method": "lime", "family": "multiple", "lime_samples": 2000},
        }
        results = ablate(cfg, grid, train, test, m)
        assert set(results) == set(grid)
        for r in results.values():
            assert r.fidelity_mean is not None

    def test_builtin_grid_covers_ablations(self):
        assert {"best", "imbalanced", "no_centering",
                "no_quadratic_interaction", "lime"} <= set(FIGURE_GRID)

    def test_lime_width_sweep_reports_best(self):
        from bcx.batch import lime_width_sweep

        train, test, m = bundle()
        cfg = RunConfig(test_count=2, seeds=(0,), lime_samples=2000,
                        family="multiple", method="lime")
        results, best = lime_width_sweep(cfg, train, test, m, widths=(1.5, 4.0))
        assert set(results) == {1.5, 4.0}
        assert best in (1.5, 4.0)
        assert results[best].fidelity_mean == max(
            r.fidelity_mean for r in results.values()
        )


class TestConfigFiles:
    def test_run_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "[run]\nmethod = lime\nmax_terms = 8\nseeds = 1,2,3\nT = 0.3\n"
            "balanced = false\n",
            encoding="utf-8",
        )
        cfg = load_run_config(str(path))
        assert cfg.method == "lime"
        assert cfg.max_terms == 8
        assert cfg.seeds == (1, 2, 3)
        assert cfg.T == 0.3
        assert cfg.balanced is False

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[run]\nbogus = 1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(str(path))

    def test_grid_file(self, tmp_path):
        path = tmp_path / "grid.cfg"
        path.write_text(
            "[no_quadratic]\nuse_quadratic = false\nuse_interaction = false\n"
            "[lime]\nmethod = lime\n",
            encoding="utf-8",
        )
        grid = load_grid(str(path))
        assert list(grid) == ["no_quadratic", "lime"]
        assert grid["no_quadratic"] == {"use_quadratic": False, "use_interaction": False}

    def test_validation(self):
        with pytest.raises(ConfigError):
            RunConfig(method="shap")
        with pytest.raises(ConfigError):
            RunConfig(seeds=())
        with pytest.raises(ConfigError):
            RunConfig(b1=0.7, b2=0.3)
        with pytest.raises(ConfigError):
            RunConfig().with_overrides(bogus=1)


def make_csv_dataset(tmp_path, n=240, seed=5):
    rng = np.random.default_rng(seed)
    f1 = rng.uniform(-2, 2, n)
    f2 = rng.uniform(-2, 2, n)
    label = np.where(2 * f1 - f2 > 0, "pos", "neg")
    lines = ["f1,f2,y"] + [f"{a:.5f},{b:.5f},{c}" for a, b, c in zip(f1, f2, label)]
    data = tmp_path / "toy.csv"
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    schema = tmp_path / "toy.schema"
    schema.write_text("numeric f1\nnumeric f2\nlabel y classes=neg,pos\n", encoding="utf-8")
    return str(data), str(schema)


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "bcx.cli", *args], capture_output=True, text=True
    )


class TestCli:
    def test_explain_succeeds(self, tmp_path):
        data, schema = make_csv_dataset(tmp_path)
        out = tmp_path / "explanation.json"
        proc = run_cli(
            "explain", "--data", data, "--schema", schema,
            "--model", "builtin:logistic_linear", "--epochs", "150",
            "--obs", "0", "--out", str(out),
            "--set", "pool_size=3000", "--set", "n_neighbourhood=45",
            "--set", "use_quadratic=false", "--set", "use_interaction=false",
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload[0]["schema_version"] == 1
        assert payload[0]["regression"]["equation"]

    def test_batch_writes_report(self, tmp_path):
        data, schema = make_csv_dataset(tmp_path)
        out = tmp_path / "report.json"
        proc = run_cli(
            "batch", "--data", data, "--schema", schema,
            "--model", "builtin:logistic_linear", "--epochs", "150",
            "--out", str(out),
            "--set", "test_count=2", "--set", "pool_size=3000",
            "--set", "n_neighbourhood=45", "--set", "seeds=0",
            "--set", "use_quadratic=false", "--set", "use_interaction=false",
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads(out.read_text(encoding="utf-8"))["summary"]["fidelity_mean"] is not None

    def test_failure_emits_error_json(self, tmp_path):
        data, schema = make_csv_dataset(tmp_path)
        proc = run_cli(
            "batch", "--data", data, "--schema", schema,
            "--model", "builtin:logistic_linear",
            "--out", str(tmp_path / "r.json"),
            "--set", "method=shap",
        )
        assert proc.returncode == 1
        err = json.loads(proc.stderr)
        assert err["error_type"] == "ConfigError"

    def test_missing_file_fails_cleanly(self, tmp_path):
        proc = run_cli(
            "explain", "--data", str(tmp_path / "nope.csv"),
            "--schema", str(tmp_path / "nope.schema"),
        )
        assert proc.returncode == 1
        assert json.loads(proc.stderr)["error_type"] in ("OSError", "SchemaError")
