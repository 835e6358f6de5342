"""Counterfactual estimation from a surrogate model and fidelity scoring.

Estimation fixes every feature except one at the explained observation's
values, reduces the surrogate to a polynomial (degree <= 2) in the free
feature's standardized coordinate, and solves for the decision boundary.
Deltas here are in standardized units throughout: the actual search delta
is divided by the feature's training stddev before comparison, and the
error threshold T applies on that scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, NoFeasibleRecordsError
from .surrogate import INDICATOR, INTERACTION, LINEAR, LOGISTIC, QUADRATIC

STATUS_OK = "ok"
STATUS_NO_REAL_ROOT = "no_real_root"
STATUS_NO_TERM = "no_term_for_feature"

DEFAULT_T = 0.25
_EPS_QUAD = 1e-12


@dataclass(frozen=True)
class EstimatedPerturbation:
    """Surrogate's estimate of a boundary perturbation, standardized units."""

    feature: str
    target_class: int
    estimated_boundary_value: float  # standardized feature value at the boundary
    estimated_delta: float
    root_multiplicity: int  # count of real roots of the boundary equation
    status: str
    roots: tuple = ()


@dataclass(frozen=True)
class FidelityRecord:
    feature: str
    target_class: int
    actual_delta: float  # standardized
    estimated_delta: float  # standardized
    error: float  # |estimated - actual|; +inf when estimation failed
    feasible: bool
    within_threshold: bool
    status: str = STATUS_OK


def _solve_boundary(a, b, c):
    """Real roots of a*z^2 + b*z + c = 0, numerically stable form."""
    if abs(a) < _EPS_QUAD:
        if abs(b) < _EPS_QUAD:
            return ()
        return (-c / b,)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ()
    if disc == 0.0:
        return (-b / (2.0 * a),)
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    r1 = q / a
    if q == 0.0:  # b == 0 and disc > 0
        r2 = -r1
    else:
        r2 = c / q
    return (r1, r2)


def estimate_b_perturbation(model, bp, x, boundary=0.5):
    """Estimate bp.feature's boundary value from the surrogate.

    All other features take their values from bp.counterfactual_point
    (identical to x off the perturbed feature). The boundary equation is
    linear predictor = logit(boundary) for the logistic family and
    regression score = boundary for the multiple family. Among real roots,
    the one closest to the feature's standardized original value wins.
    """
    ds = model.dataset
    spec = ds.feature(bp.feature)
    if not spec.is_numeric:
        raise ConfigError(f"feature {bp.feature!r} is categorical")
    fixed_num, fixed_cat = ds.encode_batch([bp.counterfactual_point])
    z_fixed = ds.standardize_numeric(fixed_num)[0]
    zpos = {ds.features[fi].name: j for j, fi in enumerate(ds.numeric_indices)}
    z0 = (float(x[ds.feature_index(bp.feature)]) - spec.mean) / spec.stddev

    a = b = 0.0
    const = float(model.intercept)
    present = False
    for term, coef in zip(model.terms, model.coefficients):
        coef = float(coef)
        if term.kind == LINEAR:
            if term.features[0] == bp.feature:
                b += coef
                present = True
            else:
                const += coef * z_fixed[zpos[term.features[0]]]
        elif term.kind == QUADRATIC:
            if term.features[0] == bp.feature:
                a += coef
                present = True
            else:
                const += coef * z_fixed[zpos[term.features[0]]] ** 2
        elif term.kind == INTERACTION:
            f, g = term.features
            if f == bp.feature and g == bp.feature:
                pass  # excluded by Term validation
            elif f == bp.feature:
                b += coef * z_fixed[zpos[g]]
                present = True
            elif g == bp.feature:
                b += coef * z_fixed[zpos[f]]
                present = True
            else:
                const += coef * z_fixed[zpos[f]] * z_fixed[zpos[g]]
        elif term.kind == INDICATOR:
            fi = ds.feature_index(term.features[0])
            level = bp.counterfactual_point[fi]
            const += coef * (1.0 if level == term.level else 0.0)

    if not present:
        return EstimatedPerturbation(
            bp.feature, bp.target_class, float("nan"), float("nan"), 0, STATUS_NO_TERM
        )

    if model.family == LOGISTIC:
        rhs = math.log(boundary / (1.0 - boundary))
    else:
        rhs = boundary
    roots = _solve_boundary(a, b, const - rhs)
    if not roots:
        return EstimatedPerturbation(
            bp.feature, bp.target_class, float("nan"), float("nan"), 0, STATUS_NO_REAL_ROOT
        )
    chosen = min(roots, key=lambda r: (abs(r - z0), r))
    return EstimatedPerturbation(
        feature=bp.feature,
        target_class=bp.target_class,
        estimated_boundary_value=float(chosen),
        estimated_delta=float(chosen - z0),
        root_multiplicity=len(roots),
        status=STATUS_OK,
        roots=tuple(sorted(roots)),
    )


def fidelity_error(actual, estimated, ds, T=DEFAULT_T):
    """Compare actual and estimated deltas on the standardized scale.

    Estimation failures (no real root, feature missing from the model)
    yield an infinite error and count against fidelity rather than being
    dropped.
    """
    if actual.feature != estimated.feature or actual.target_class != estimated.target_class:
        raise ConfigError("actual and estimated perturbations do not match")
    spec = ds.feature(actual.feature)
    actual_std = actual.delta / spec.stddev
    if estimated.status != STATUS_OK:
        return FidelityRecord(
            feature=actual.feature,
            target_class=actual.target_class,
            actual_delta=actual_std,
            estimated_delta=float("nan"),
            error=float("inf"),
            feasible=actual.feasible,
            within_threshold=False,
            status=estimated.status,
        )
    err = abs(estimated.estimated_delta - actual_std)
    return FidelityRecord(
        feature=actual.feature,
        target_class=actual.target_class,
        actual_delta=actual_std,
        estimated_delta=estimated.estimated_delta,
        error=err,
        feasible=actual.feasible,
        within_threshold=err < T,
        status=STATUS_OK,
    )


def percent_fidelity(records, T=DEFAULT_T):
    """Share of feasible records whose error is below T.

    Infeasible records leave both counts; estimation failures stay in the
    denominator. Raises NoFeasibleRecordsError when nothing is feasible.
    """
    if T <= 0:
        raise ConfigError("T must be positive")
    feasible = [r for r in records if r.feasible]
    if not feasible:
        raise NoFeasibleRecordsError("no feasible boundary perturbations in batch")
    hits = sum(1 for r in feasible if r.error < T)
    return hits / len(feasible)
