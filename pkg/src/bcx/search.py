"""Boundary counterfactual search.

For one observation and one target class, finds per numeric feature the
minimum single-feature change that pushes the model's target-class
probability across the decision threshold: an outward grid walk over the
feature's training range locates the first flipping bracket, then bisection
refines the crossing. Categorical features are searched by enumerating
alternative levels; those produce level flips, not numeric deltas, and are
excluded from fidelity accounting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Observation
from .errors import ConfigError, SchemaError, TargetClassError


@dataclass
class SearchConfig:
    steps: int = 200          # grid points per direction; spacing = range / steps
    refine_tol: float = 1e-4  # bisection bracket width, as a fraction of the range
    threshold: float = 0.5    # target-class probability at the boundary
    extend_range: float = 0.0 # widen the search window by this fraction of the range

    def __post_init__(self):
        if self.steps < 2:
            raise ConfigError("steps must be >= 2")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must be in (0, 1)")
        if self.refine_tol <= 0.0:
            raise ConfigError("refine_tol must be positive")


@dataclass(frozen=True)
class BoundaryPerturbation:
    """Minimum single-feature numeric change that flips the classification."""

    feature: str
    target_class: int
    original_value: float
    boundary_value: float
    delta: float
    feasible: bool
    counterfactual_point: Observation


@dataclass(frozen=True)
class LevelFlip:
    """Single categorical level swap that flips the classification."""

    feature: str
    target_class: int
    original_level: str
    flipped_level: str
    counterfactual_point: Observation


def _search_window(spec, extend_range):
    pad = extend_range * spec.range_width
    return spec.train_min - pad, spec.train_max + pad


def search_grid(x, feature, ds, steps, extend_range=0.0):
    """Candidate values walking outward from x's value, alternating directions.

    Spacing is range/steps; values are clipped to the search window, and
    clipped duplicates or the original value itself are dropped. The first
    candidate steps downward.
    """
    if steps < 2:
        raise ConfigError("steps must be >= 2")
    spec = ds.feature(feature)
    if not spec.is_numeric:
        raise SchemaError(f"feature {feature!r} is categorical; grid search needs numeric")
    lo, hi = _search_window(spec, extend_range)
    v0 = float(x[ds.feature_index(feature)])
    spacing = (hi - lo) / steps
    if spacing <= 0.0:
        return []
    seen = {v0}
    out = []
    for k in range(1, steps + 1):
        for cand in (v0 - k * spacing, v0 + k * spacing):
            cand = min(max(cand, lo), hi)
            if cand not in seen:
                seen.add(cand)
                out.append(cand)
    return out


def _directional_grids(spec, v0, steps, extend_range):
    """(down, up) candidate lists, each ordered by distance from v0."""
    lo, hi = _search_window(spec, extend_range)
    spacing = (hi - lo) / steps
    down, up = [], []
    if spacing <= 0.0:
        return down, up
    for k in range(1, steps + 1):
        c = max(v0 - k * spacing, lo)
        if c < v0 and (not down or c < down[-1]):
            down.append(c)
        c = min(v0 + k * spacing, hi)
        if c > v0 and (not up or c > up[-1]):
            up.append(c)
    return down, up


def find_b_perturbations(x, m, ds, target_class, cfg=None):
    """Boundary perturbations of x toward target_class, one per flippable numeric feature.

    Features whose probability never reaches the threshold inside the search
    window are simply absent from the result. Raises TargetClassError when
    the model already places x on the target side.
    """
    cfg = cfg or SearchConfig()
    ds.validate_observation(x)
    p_x = m.predict_proba([x])[0]
    if int(np.argmax(p_x)) == int(target_class) or p_x[target_class] >= cfg.threshold:
        raise TargetClassError(
            f"observation is already classified as class {target_class}"
        )

    # one prediction batch covering every feature's full grid
    plans = []  # (feature index, direction, rank, value)
    for fi in ds.numeric_indices:
        spec = ds.features[fi]
        v0 = float(x[fi])
        down, up = _directional_grids(spec, v0, cfg.steps, cfg.extend_range)
        for rank in range(max(len(down), len(up))):
            if rank < len(down):
                plans.append((fi, -1, rank, down[rank]))
            if rank < len(up):
                plans.append((fi, +1, rank, up[rank]))
    if plans:
        batch = [_with_value(x, fi, v) for fi, _, _, v in plans]
        probs = _predict_chunked(m, ds, batch)[:, target_class]
    else:
        probs = np.zeros(0)

    # per feature: first flip in outward order, then its same-direction bracket
    first_flip = {}
    grids = {}
    for (fi, direction, rank, value), p in zip(plans, probs):
        grids.setdefault(fi, {}).setdefault(direction, []).append((rank, value, p))
    for fi in ds.numeric_indices:
        per_dir = grids.get(fi)
        if not per_dir:
            continue
        ordered = sorted(
            [(rank, direction, value, p)
             for direction, entries in per_dir.items()
             for rank, value, p in entries]
        )
        for rank, direction, value, p in ordered:
            if p >= cfg.threshold:
                inside = (
                    float(x[fi])
                    if rank == 0
                    else per_dir[direction][rank - 1][1]
                )
                first_flip[fi] = (inside, value)
                break

    # bisection refinement, batched across features per iteration
    brackets = {fi: list(pair) for fi, pair in first_flip.items()}
    tol = {
        fi: cfg.refine_tol * max(ds.features[fi].range_width, np.finfo(float).tiny)
        for fi in brackets
    }
    while True:
        active = [fi for fi, (a, b) in brackets.items() if abs(b - a) > tol[fi]]
        if not active:
            break
        mids = {fi: 0.5 * (brackets[fi][0] + brackets[fi][1]) for fi in active}
        batch = [_with_value(x, fi, mids[fi]) for fi in active]
        probs = _predict_chunked(m, ds, batch)[:, target_class]
        for fi, p in zip(active, probs):
            if p >= cfg.threshold:
                brackets[fi][1] = mids[fi]
            else:
                brackets[fi][0] = mids[fi]

    out = []
    for fi in ds.numeric_indices:
        if fi not in brackets:
            continue
        spec = ds.features[fi]
        boundary = brackets[fi][1]  # the endpoint on the target side
        original = float(x[fi])
        out.append(
            BoundaryPerturbation(
                feature=spec.name,
                target_class=int(target_class),
                original_value=original,
                boundary_value=boundary,
                delta=boundary - original,
                feasible=spec.train_min <= boundary <= spec.train_max,
                counterfactual_point=_with_value(x, fi, boundary),
            )
        )
    return out


def find_level_flips(x, m, ds, target_class, cfg=None):
    """Categorical level swaps that flip x to the target class."""
    cfg = cfg or SearchConfig()
    swaps = []
    batch = []
    for fi in ds.categorical_indices:
        spec = ds.features[fi]
        for level in spec.levels:
            if level == x[fi]:
                continue
            swaps.append((fi, level))
            batch.append(_with_value(x, fi, level))
    if not batch:
        return []
    probs = _predict_chunked(m, ds, batch)[:, target_class]
    out = []
    for (fi, level), p in zip(swaps, probs):
        if p >= cfg.threshold:
            spec = ds.features[fi]
            out.append(
                LevelFlip(
                    feature=spec.name,
                    target_class=int(target_class),
                    original_level=x[fi],
                    flipped_level=level,
                    counterfactual_point=_with_value(x, fi, level),
                )
            )
    return out


def _with_value(x, fi, value):
    vals = list(x)
    vals[fi] = value
    return tuple(vals)


def _predict_chunked(m, ds, batch, chunk=4096):
    rows = []
    for start in range(0, len(batch), chunk):
        rows.append(m.predict_proba(batch[start : start + chunk]))
    return np.vstack(rows)
