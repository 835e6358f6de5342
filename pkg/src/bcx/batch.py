"""Batch evaluation over test observations with repeated synthetic data.

One pool per seed is shared across all observations; boundary searches are
cached across seeds (they depend on the model only). Per seed, the fidelity
records of every explanation pool together into one % fidelity figure; the
batch reports their mean and standard error across seeds. Per-observation
failures are collected, never fatal.
"""
from __future__ import annotations

import html as _html
import json
import time
from dataclasses import dataclass

import numpy as np

from .errors import BcxError, NoFeasibleRecordsError
from .estimator import percent_fidelity
from .explain import SCHEMA_VERSION, explain_observation, make_pool


@dataclass
class SeedOutcome:
    seed: int
    fidelity: float  # None when the seed produced no feasible records
    n_records: int
    n_feasible: int
    n_within: int


@dataclass
class BatchResult:
    config: dict
    per_seed: list
    fidelity_mean: float
    fidelity_stderr: float
    explanations: list  # serialized Explanation dicts, (seed, observation) order
    failures: list  # {"seed", "observation_index", "error_type", "message"}
    mean_surrogate_gap: float
    elapsed_seconds: float

    def to_dict(self, include_explanations=True):
        d = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "summary": {
                "fidelity_mean": self.fidelity_mean,
                "fidelity_stderr": self.fidelity_stderr,
                "per_seed": [vars(s).copy() for s in self.per_seed],
                "mean_surrogate_gap": self.mean_surrogate_gap,
                "n_failures": len(self.failures),
            },
            "failures": self.failures,
            "timing": {"elapsed_seconds": self.elapsed_seconds},
        }
        if include_explanations:
            d["explanations"] = self.explanations
        if not self.failures:
            del d["failures"]
        return d


def run_batch(cfg, train, test, m, keep_explanations=True):
    """Evaluate cfg over the first cfg.test_count rows of the test partition."""
    if len(test) < cfg.test_count:
        raise BcxError(
            f"test partition has {len(test)} rows, config wants {cfg.test_count}"
        )
    t0 = time.perf_counter()
    observations = [(i, test.observation(i)) for i in range(cfg.test_count)]
    bps_cache = {}
    per_seed, explanations, failures, gaps = [], [], [], []
    for seed in cfg.seeds:
        pool = make_pool(train, m, cfg, seed)
        seed_records = []
        for idx, x in observations:
            try:
                expls = explain_observation(
                    train, m, x, cfg, seed=seed, pool=pool,
                    bps_cache=bps_cache, observation_index=idx,
                )
            except BcxError as exc:
                failures.append(
                    {
                        "seed": seed,
                        "observation_index": idx,
                        "error_type": type(exc).__name__,
                        "message": str(exc),
                    }
                )
                continue
            for e in expls:
                seed_records.extend(e.records)
                gaps.append(e.surrogate_gap)
                if keep_explanations:
                    explanations.append(e.to_dict())
        feasible = [r for r in seed_records if r.feasible]
        within = sum(1 for r in feasible if r.error < cfg.T)
        try:
            fid = percent_fidelity(seed_records, T=cfg.T) if seed_records else None
        except NoFeasibleRecordsError:
            fid = None
        per_seed.append(
            SeedOutcome(
                seed=seed,
                fidelity=fid,
                n_records=len(seed_records),
                n_feasible=len(feasible),
                n_within=within,
            )
        )

    fids = [s.fidelity for s in per_seed if s.fidelity is not None]
    mean = float(np.mean(fids)) if fids else None
    stderr = (
        float(np.std(fids, ddof=1) / np.sqrt(len(fids))) if len(fids) > 1 else 0.0
    )
    return BatchResult(
        config=cfg.to_dict(),
        per_seed=per_seed,
        fidelity_mean=mean,
        fidelity_stderr=stderr,
        explanations=explanations,
        failures=failures,
        mean_surrogate_gap=float(np.mean(gaps)) if gaps else None,
        elapsed_seconds=time.perf_counter() - t0,
    )


def ablate(base_cfg, grid, train, test, m, keep_explanations=False):
    """Run one batch per named override set; returns {name: BatchResult}."""
    out = {}
    for name, overrides in grid.items():
        cfg = base_cfg.with_overrides(**overrides)
        out[name] = run_batch(cfg, train, test, m, keep_explanations=keep_explanations)
    return out


def lime_width_sweep(cfg, train, test, m, widths=(1.5, 2.0, 3.0, 4.0)):
    """Run the LIME baseline once per kernel width; returns
    ({width: BatchResult}, best width). Mirrors the evaluation protocol of
    trying several widths and reporting the best."""
    results = {}
    for width in widths:
        wcfg = cfg.with_overrides(method="lime", kernel_width=width)
        results[width] = run_batch(wcfg, train, test, m, keep_explanations=False)
    best = max(
        (w for w in results if results[w].fidelity_mean is not None),
        key=lambda w: results[w].fidelity_mean,
        default=None,
    )
    return results, best


FIGURE_GRID = {
    "best": {"use_counterfactual_augmentation": True},
    "no_augmentation": {"use_counterfactual_augmentation": False},
    "imbalanced": {"use_counterfactual_augmentation": True, "balanced": False},
    "no_centering": {"use_counterfactual_augmentation": True, "centering": False},
    "no_quadratic_interaction": {
        "use_counterfactual_augmentation": True,
        "use_quadratic": False,
        "use_interaction": False,
    },
    "lime": {"method": "lime", "family": "multiple"},
}


# -- serialization ---------------------------------------------------------


def report_json(result, include_explanations=True):
    """Canonical JSON text: key-sorted, newline-terminated, timing separate
    so that reruns with identical config and seeds reproduce it bit-for-bit
    once the timing block is dropped."""
    return json.dumps(result.to_dict(include_explanations), sort_keys=True, indent=2) + "\n"


def report_csv(result):
    """One fidelity record per row."""
    lines = [
        "seed,observation_index,target_class,method,feature,actual_delta,"
        "estimated_delta,error,feasible,within_threshold,status"
    ]
    for e in result.explanations:
        for r in e["fidelity_records"]:
            lines.append(
                ",".join(
                    [
                        str(e["seed"]),
                        str(e["observation_index"]),
                        str(r["target_class"]),
                        e["regression"]["method"],
                        r["feature"],
                        _csv_num(r["actual_delta"]),
                        _csv_num(r["estimated_delta"]),
                        _csv_num(r["error"]),
                        str(r["feasible"]).lower(),
                        str(r["within_threshold"]).lower(),
                        r["status"],
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def _csv_num(v):
    return "" if v is None else repr(float(v))


def report_html(result):
    """Self-contained report: summary plus one section per explanation."""
    esc = _html.escape
    s = result.to_dict(include_explanations=False)["summary"]
    rows = []
    for seed in s["per_seed"]:
        fid = "n/a" if seed["fidelity"] is None else f"{seed['fidelity']:.3f}"
        rows.append(
            f"<tr><td>{seed['seed']}</td><td>{fid}</td>"
            f"<td>{seed['n_within']}/{seed['n_feasible']}</td></tr>"
        )
    mean = "n/a" if result.fidelity_mean is None else f"{result.fidelity_mean:.3f}"
    parts = [
        "<!doctype html><html><head><meta charset='utf-8'>",
        "<title>counterfactual fidelity report</title>",
        "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}",
        "td,th{border:1px solid #999;padding:4px 8px}.bad{color:#b00}.ok{color:#080}",
        "</style></head><body>",
        "<h1>Counterfactual fidelity report</h1>",
        f"<p>% fidelity (T={esc(str(result.config['T']))}): <b>{mean}</b>"
        f" &plusmn; {result.fidelity_stderr:.3f} over {len(result.per_seed)} seed(s)</p>",
        "<table><tr><th>seed</th><th>% fidelity</th><th>within/feasible</th></tr>",
        *rows,
        "</table>",
    ]
    if result.failures:
        parts.append(f"<h2>Failures ({len(result.failures)})</h2><ul>")
        parts.extend(
            f"<li>seed {f['seed']}, observation {f['observation_index']}: "
            f"{esc(f['error_type'])}: {esc(f['message'])}</li>"
            for f in result.failures
        )
        parts.append("</ul>")
    for e in result.explanations:
        parts.append(
            f"<h2>Observation {e['observation_index']} &rarr; class "
            f"{e['target_class']} (seed {e['seed']})</h2>"
        )
        parts.append(f"<p><code>{esc(e['regression']['equation'])}</code></p>")
        parts.append(
            "<table><tr><th>feature</th><th>actual &Delta;</th>"
            "<th>estimated &Delta;</th><th>error</th><th>status</th></tr>"
        )
        for r in e["fidelity_records"]:
            cls = "ok" if r["within_threshold"] else "bad"
            parts.append(
                f"<tr class='{cls}'><td>{esc(r['feature'])}</td>"
                f"<td>{_fmt(r['actual_delta'])}</td>"
                f"<td>{_fmt(r['estimated_delta'])}</td>"
                f"<td>{_fmt(r['error'])}</td><td>{esc(r['status'])}</td></tr>"
            )
        parts.append("</table>")
    parts.append("</body></html>")
    return "".join(parts) + "\n"


def _fmt(v):
    return "&mdash;" if v is None else f"{v:.4f}"


def write_report(result, fmt, path, include_explanations=True):
    """Serialize a BatchResult to json, csv or html at ``path``."""
    if fmt == "json":
        text = report_json(result, include_explanations)
    elif fmt == "csv":
        text = report_csv(result)
    elif fmt == "html":
        text = report_html(result)
    else:
        raise BcxError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
