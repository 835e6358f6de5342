"""Per-observation explanation pipeline.

Ties the stages together for one observation and one target class: boundary
search, neighbourhood selection (optionally augmented with the weighted
counterfactual points), surrogate fit (or the LIME baseline), counterfactual
estimation, fidelity records. The result is the explanation tuple of actual
perturbations, estimated perturbations, regression and errors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoFeasibleRecordsError
from .estimator import estimate_b_perturbation, fidelity_error, percent_fidelity
from .lime import KernelConfig, lime_explain
from .neighbourhood import (
    augment_with_counterfactuals,
    balanced_neighbourhood,
    imbalanced_neighbourhood,
)
from .search import SearchConfig, find_b_perturbations, find_level_flips
from .surrogate import fit
from .synthetic import generate

SCHEMA_VERSION = 1


@dataclass
class Explanation:
    """Explanation of one observation toward one target class."""

    observation: tuple
    observation_index: int
    predicted_class: int
    target_class: int
    response_at_x: float  # model's target-class probability at x
    actual: list  # BoundaryPerturbation
    level_flips: list
    estimated: list  # EstimatedPerturbation
    model: object  # SurrogateModel
    records: list  # FidelityRecord
    fidelity: float  # None when no feasible records
    surrogate_gap: float  # |surrogate(x) - response_at_x|
    seed: int

    def to_dict(self):
        ds = self.model.dataset
        actual = []
        for bp in self.actual:
            spec = ds.feature(bp.feature)
            actual.append(
                {
                    "feature": bp.feature,
                    "target_class": bp.target_class,
                    "original_value": bp.original_value,
                    "boundary_value": bp.boundary_value,
                    "delta": bp.delta,
                    "delta_std": bp.delta / spec.stddev,
                    "feasible": bp.feasible,
                }
            )
        estimated = []
        for ep in self.estimated:
            spec = ds.feature(ep.feature)
            raw = (
                spec.mean + spec.stddev * ep.estimated_boundary_value
                if ep.status == "ok"
                else None
            )
            estimated.append(
                {
                    "feature": ep.feature,
                    "target_class": ep.target_class,
                    "status": ep.status,
                    "estimated_boundary_value_std": _none_if_nan(ep.estimated_boundary_value),
                    "estimated_boundary_value": raw,
                    "estimated_delta_std": _none_if_nan(ep.estimated_delta),
                    "root_multiplicity": ep.root_multiplicity,
                    "roots": list(ep.roots),
                }
            )
        records = [
            {
                "feature": r.feature,
                "target_class": r.target_class,
                "actual_delta": r.actual_delta,
                "estimated_delta": _none_if_nan(r.estimated_delta),
                "error": r.error if np.isfinite(r.error) else None,
                "feasible": r.feasible,
                "within_threshold": r.within_threshold,
                "status": r.status,
            }
            for r in self.records
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "observation_index": self.observation_index,
            "observation": list(self.observation),
            "predicted_class": self.predicted_class,
            "target_class": self.target_class,
            "response_at_x": self.response_at_x,
            "actual_perturbations": actual,
            "level_flips": [
                {
                    "feature": lf.feature,
                    "target_class": lf.target_class,
                    "original_level": lf.original_level,
                    "flipped_level": lf.flipped_level,
                }
                for lf in self.level_flips
            ],
            "estimated_perturbations": estimated,
            "fidelity_records": records,
            "fidelity": self.fidelity,
            "surrogate_gap": self.surrogate_gap,
            "regression": self.model.to_dict(),
            "seed": self.seed,
        }


def _none_if_nan(v):
    return None if v != v else float(v)


def search_config(cfg):
    return SearchConfig(
        steps=cfg.search_steps,
        refine_tol=cfg.refine_tol,
        threshold=cfg.boundary_threshold,
    )


def make_pool(ds, m, cfg, seed):
    """Synthetic pool sized for cfg.method."""
    count = cfg.lime_samples if cfg.method == "lime" else cfg.pool_size
    return generate(ds, m, count, seed, chunk=cfg.label_chunk)


def explain_observation(ds, m, x, cfg, seed=0, pool=None, bps_cache=None,
                        observation_index=None, target_class=None):
    """Explanations of x, one per target class (every class but the predicted
    one, or just ``target_class`` when given).

    ``pool`` lets batch runs share one pool per seed; ``bps_cache`` is an
    optional mutable mapping {(observation_index, target_class): (bps, flips)}
    reused across seeds since boundary search does not depend on the pool.
    """
    ds.validate_observation(x)
    p_x = m.predict_proba([x])[0]
    predicted = int(np.argmax(p_x))
    targets = [target_class] if target_class is not None else [
        c for c in range(m.class_count) if c != predicted
    ]
    if pool is None:
        pool = make_pool(ds, m, cfg, seed)
    scfg = search_config(cfg)

    out = []
    for tc in targets:
        cache_key = (observation_index, tc)
        if bps_cache is not None and observation_index is not None and cache_key in bps_cache:
            bps, flips = bps_cache[cache_key]
        else:
            bps = find_b_perturbations(x, m, ds, tc, scfg)
            flips = find_level_flips(x, m, ds, tc, scfg)
            if bps_cache is not None and observation_index is not None:
                bps_cache[cache_key] = (bps, flips)
        y_x = float(p_x[tc])

        if cfg.method == "lime":
            model = lime_explain(
                x, m, ds,
                KernelConfig(kernel_width=cfg.kernel_width, sample_count=cfg.lime_samples),
                max_terms=cfg.max_terms, target_class=tc, pool=pool, seed=seed,
            )
        else:
            if cfg.balanced:
                nbd = balanced_neighbourhood(pool, x, tc, cfg.b1, cfg.b2, cfg.n_neighbourhood)
            else:
                nbd = imbalanced_neighbourhood(pool, x, tc, cfg.n_neighbourhood, cfg.b1, cfg.b2)
            if cfg.use_counterfactual_augmentation and bps:
                nbd = augment_with_counterfactuals(nbd, bps, m, weight=cfg.cf_weight)
            model = fit(
                nbd, x, y_x,
                family=cfg.family,
                max_terms=cfg.max_terms,
                use_quadratic=cfg.use_quadratic,
                use_interaction=cfg.use_interaction,
                centering=cfg.centering,
            )

        estimated = [
            estimate_b_perturbation(model, bp, x, boundary=cfg.boundary_threshold)
            for bp in bps
        ]
        records = [
            fidelity_error(bp, ep, ds, T=cfg.T) for bp, ep in zip(bps, estimated)
        ]
        try:
            fid = percent_fidelity(records, T=cfg.T) if records else None
        except NoFeasibleRecordsError:
            fid = None
        out.append(
            Explanation(
                observation=tuple(x),
                observation_index=observation_index,
                predicted_class=predicted,
                target_class=tc,
                response_at_x=y_x,
                actual=bps,
                level_flips=flips,
                estimated=estimated,
                model=model,
                records=records,
                fidelity=fid,
                surrogate_gap=abs(model.evaluate(x) - y_x),
                seed=seed,
            )
        )
    return out
