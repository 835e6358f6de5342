"""Local surrogate regression with forward stepwise term selection.

Terms are built on standardized numeric coordinates (and indicator columns
for categorical levels). Centering is exact: every candidate column is
shifted by its value at the explained observation x and the intercept is
pinned to the observed response (logit of it for the logistic family), so
the fitted curve passes through x by construction rather than via a large
pseudo-weight.

Selection adds, at each step, the term with the largest reduction of the
weighted residual sum of squares (multiple family) or weighted deviance
(logistic family), and stops at ``max_terms`` or when no candidate improves
the criterion by more than ``min_improvement``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import irls_fit, logistic_scan, ols_fit, ols_scan
from .errors import ConfigError, ConvergenceError, SingularDesignError

LINEAR = "linear"
QUADRATIC = "quadratic"
INTERACTION = "interaction"
INDICATOR = "indicator"

MULTIPLE = "multiple"
LOGISTIC = "logistic"

RESPONSE_CLIP = 1e-6
MIN_IMPROVEMENT = 1e-6
MAX_TERMS = 14


@dataclass(frozen=True)
class Term:
    kind: str
    features: tuple
    level: str = None

    def __post_init__(self):
        if self.kind in (LINEAR, QUADRATIC, INDICATOR):
            if len(self.features) != 1:
                raise ConfigError(f"{self.kind} term takes one feature")
        elif self.kind == INTERACTION:
            if len(self.features) != 2 or self.features[0] == self.features[1]:
                raise ConfigError("interaction term takes two distinct features")
        else:
            raise ConfigError(f"unknown term kind {self.kind!r}")
        if (self.kind == INDICATOR) != (self.level is not None):
            raise ConfigError("level is set exactly for indicator terms")

    def label(self):
        if self.kind == LINEAR:
            return self.features[0]
        if self.kind == QUADRATIC:
            return f"{self.features[0]}^2"
        if self.kind == INTERACTION:
            return f"{self.features[0]}*{self.features[1]}"
        return f"{self.features[0]}={self.level}"


@dataclass
class FitStats:
    family: str
    n_points: int
    n_terms: int
    adjusted_r2: float = float("nan")
    r2: float = float("nan")
    deviance: float = float("nan")
    weighted_residual_norm: float = float("nan")


@dataclass
class SurrogateModel:
    """Fitted local regression in standardized coordinates.

    ``evaluate`` returns the regression score for the multiple family and
    the sigmoid-transformed score for the logistic family. For centered
    models evaluate(center) equals center_response by construction.
    """

    family: str
    terms: list
    coefficients: np.ndarray
    intercept: float
    center: tuple
    center_response: float
    centered: bool
    dataset: object
    fit_stats: FitStats = None
    method: str = "bcx"

    def linear_predictor(self, obs):
        cols = _term_matrix(self.dataset, self.terms, *self.dataset.encode_batch([obs]))
        return float(self.intercept + cols[0] @ self.coefficients)

    def evaluate(self, obs):
        z = self.linear_predictor(obs)
        return _sigmoid_scalar(z) if self.family == LOGISTIC else z

    def evaluate_batch(self, num, cat):
        cols = _term_matrix(self.dataset, self.terms, num, cat)
        z = self.intercept + cols @ self.coefficients
        return _sigmoid_vec(z) if self.family == LOGISTIC else z

    def equation_text(self):
        parts = [f"{self.intercept:.6g}"]
        for term, c in zip(self.terms, self.coefficients):
            op = "-" if c < 0 else "+"
            parts.append(f"{op} {abs(c):.6g}*{term.label()}")
        body = " ".join(parts)
        if self.family == LOGISTIC:
            return f"sigmoid({body})"
        return body

    def to_dict(self):
        return {
            "family": self.family,
            "method": self.method,
            "centered": self.centered,
            "intercept": self.intercept,
            "terms": [
                {
                    "kind": t.kind,
                    "features": list(t.features),
                    "level": t.level,
                    "label": t.label(),
                    "coefficient": float(c),
                }
                for t, c in zip(self.terms, self.coefficients)
            ],
            "center": list(self.center),
            "center_response": self.center_response,
            "equation": self.equation_text(),
            "fit_stats": None if self.fit_stats is None else {
                k: (None if isinstance(v, float) and not np.isfinite(v) else v)
                for k, v in vars(self.fit_stats).items()
            },
        }


def evaluate(model, obs):
    """Operation form of SurrogateModel.evaluate."""
    return model.evaluate(obs)


def _sigmoid_scalar(z):
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def _sigmoid_vec(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _logit(p):
    return float(np.log(p / (1.0 - p)))


def reference_level(spec):
    """Most frequent level; ties resolve to the earliest declared level."""
    best, best_f = None, -1.0
    for lv in spec.levels:
        f = spec.level_frequencies.get(lv, 0.0)
        if f > best_f:
            best, best_f = lv, f
    return best


def candidate_terms(ds, use_quadratic=True, use_interaction=True):
    """Candidate pool: linear terms for numerics, indicators for categorical
    levels (reference level omitted), optional quadratics and numeric-numeric
    interactions."""
    numeric = [ds.features[i].name for i in ds.numeric_indices]
    terms = [Term(LINEAR, (f,)) for f in numeric]
    for fi in ds.categorical_indices:
        spec = ds.features[fi]
        ref = reference_level(spec)
        terms.extend(
            Term(INDICATOR, (spec.name,), level=lv) for lv in spec.levels if lv != ref
        )
    if use_quadratic:
        terms.extend(Term(QUADRATIC, (f,)) for f in numeric)
    if use_interaction:
        for i, f in enumerate(numeric):
            terms.extend(Term(INTERACTION, (f, g)) for g in numeric[i + 1 :])
    return terms


def _term_matrix(ds, terms, num, cat):
    """Columns of term values: standardized numerics, 0/1 indicators."""
    z = ds.standardize_numeric(num) if num.shape[1] else num
    zcol = {ds.features[fi].name: z[:, j] for j, fi in enumerate(ds.numeric_indices)}
    ccol = {ds.features[fi].name: (fi, cat[:, j]) for j, fi in enumerate(ds.categorical_indices)}
    out = np.empty((num.shape[0], len(terms)))
    for j, t in enumerate(terms):
        if t.kind == LINEAR:
            out[:, j] = zcol[t.features[0]]
        elif t.kind == QUADRATIC:
            out[:, j] = zcol[t.features[0]] ** 2
        elif t.kind == INTERACTION:
            out[:, j] = zcol[t.features[0]] * zcol[t.features[1]]
        else:
            fi, codes = ccol[t.features[0]]
            out[:, j] = codes == ds.features[fi].level_index(t.level)
    return out


def fit(nbd, x, y_x, family=MULTIPLE, max_terms=MAX_TERMS, use_quadratic=True,
        use_interaction=True, centering=True, min_improvement=MIN_IMPROVEMENT,
        terms=None, method="bcx"):
    """Forward stepwise weighted fit on a neighbourhood.

    ``y_x`` is the model's target-class probability at x; with centering it
    becomes the pinned response at x. A caller may pass an explicit
    candidate ``terms`` pool (the LIME baseline restricts it to linear and
    indicator terms).
    """
    if len(nbd) == 0:
        raise ConfigError("empty neighbourhood")
    if max_terms < 1:
        raise ConfigError("max_terms must be >= 1")
    ds = nbd.dataset
    ds.validate_observation(x)
    pool = list(terms) if terms is not None else candidate_terms(ds, use_quadratic, use_interaction)

    T = _term_matrix(ds, pool, nbd.num, nbd.cat)
    x_num, x_cat = ds.encode_batch([x])
    t_x = _term_matrix(ds, pool, x_num, x_cat)[0]
    w = np.ascontiguousarray(nbd.weights, dtype=np.float64)
    y = np.ascontiguousarray(nbd.responses, dtype=np.float64)

    # prune columns that do not vary inside the neighbourhood
    spread = T.max(axis=0) - T.min(axis=0)
    usable = [j for j in range(len(pool)) if spread[j] > 1e-12]

    X = np.ascontiguousarray(T - t_x) if centering else np.ascontiguousarray(T)
    n = len(y)

    if family == MULTIPLE:
        if centering:
            resp = y - y_x
            D = np.zeros((n, 0))
        else:
            resp = y.copy()
            D = np.ones((n, 1))
        base_coef, current = ols_fit(D, resp, w)
        if not np.isfinite(current):
            raise SingularDesignError(["<intercept>"])
    elif family == LOGISTIC:
        y_clip = np.clip(y, RESPONSE_CLIP, 1.0 - RESPONSE_CLIP)
        if centering:
            offset = np.full(n, _logit(float(np.clip(y_x, RESPONSE_CLIP, 1.0 - RESPONSE_CLIP))))
            D = np.zeros((n, 0))
        else:
            offset = np.zeros(n)
            D = np.ones((n, 1))
        offset = np.ascontiguousarray(offset)
        base_coef, current, converged = irls_fit(D, y_clip, w, offset)
        if not np.isfinite(current):
            raise SingularDesignError(["<intercept>"])
        if not converged:
            raise ConvergenceError("logistic base fit exceeded its iteration cap")
    else:
        raise ConfigError(f"unknown family {family!r}")

    selected = []
    beta = base_coef
    remaining = list(usable)
    while len(selected) < max_terms and remaining:
        C = np.ascontiguousarray(X[:, remaining])
        if family == MULTIPLE:
            crits = ols_scan(D, C, resp, w)
        else:
            crits = logistic_scan(D, C, y_clip, w, offset, beta, max_iter=25)
        j = int(np.argmin(crits))
        if not np.isfinite(crits[j]) or current - crits[j] < min_improvement:
            break
        pick = remaining.pop(j)
        selected.append(pick)
        D = np.ascontiguousarray(np.column_stack([D, X[:, pick]]))
        if family == MULTIPLE:
            beta, current = ols_fit(D, resp, w)
            if not np.isfinite(current):
                raise SingularDesignError([pool[i].label() for i in selected])
        else:
            warm = np.concatenate([beta, [0.0]])
            beta, current, converged = irls_fit(D, y_clip, w, offset, beta0=warm)
            if not np.isfinite(current):
                raise SingularDesignError([pool[i].label() for i in selected])
            if not converged:
                raise ConvergenceError(
                    "logistic fit exceeded its iteration cap with terms: "
                    + ", ".join(pool[i].label() for i in selected)
                )

    model_terms = [pool[i] for i in selected]
    if centering:
        coeffs = np.asarray(beta, dtype=np.float64)
        link_center = y_x if family == MULTIPLE else _logit(
            float(np.clip(y_x, RESPONSE_CLIP, 1.0 - RESPONSE_CLIP))
        )
        intercept = float(link_center - coeffs @ t_x[selected]) if selected else float(link_center)
        center_response = float(y_x)
    else:
        coeffs = np.asarray(beta[1:], dtype=np.float64)
        intercept = float(beta[0])

    model = SurrogateModel(
        family=family,
        terms=model_terms,
        coefficients=coeffs,
        intercept=intercept,
        center=tuple(x),
        center_response=float(y_x) if centering else 0.0,
        centered=centering,
        dataset=ds,
        method=method,
    )
    if not centering:
        model.center_response = model.evaluate(x)

    pred = model.evaluate_batch(nbd.num, nbd.cat)
    resid = y - pred
    wsum = float(w.sum())
    ybar = float((w * y).sum() / wsum)
    tss = float((w * (y - ybar) ** 2).sum())
    rss = float((w * resid**2).sum())
    k = len(model_terms)
    stats = FitStats(family=family, n_points=n, n_terms=k)
    stats.weighted_residual_norm = float(np.sqrt(rss))
    if family == MULTIPLE:
        stats.r2 = 1.0 - rss / tss if tss > 0 else float("nan")
        if n - k - 1 > 0 and tss > 0:
            stats.adjusted_r2 = 1.0 - (1.0 - stats.r2) * (n - 1) / (n - k - 1)
    else:
        stats.deviance = float(current)
    model.fit_stats = stats
    return model


def simplify(model, keep, x):
    """Re-express the model over the kept features by substituting x's values
    into every other feature.

    Terms fully outside ``keep`` fold into the intercept; interactions mixing
    a kept and a non-kept feature become linear terms in the kept one.
    Evaluations at points that differ from x only inside ``keep`` are
    unchanged.
    """
    if not keep:
        raise ConfigError("keep set must not be empty")
    ds = model.dataset
    keep = set(keep)
    for name in keep:
        ds.feature(name)
    x_num, x_cat = ds.encode_batch([x])
    z = ds.standardize_numeric(x_num)[0] if x_num.shape[1] else x_num[0]
    z_of = {ds.features[fi].name: float(z[j]) for j, fi in enumerate(ds.numeric_indices)}
    level_of = {ds.features[fi].name: x[fi] for fi in ds.categorical_indices}

    merged = {}
    order = []

    def add(term, c):
        if term not in merged:
            merged[term] = 0.0
            order.append(term)
        merged[term] += c

    intercept = float(model.intercept)
    for term, c in zip(model.terms, model.coefficients):
        c = float(c)
        if term.kind == LINEAR:
            if term.features[0] in keep:
                add(term, c)
            else:
                intercept += c * z_of[term.features[0]]
        elif term.kind == QUADRATIC:
            if term.features[0] in keep:
                add(term, c)
            else:
                intercept += c * z_of[term.features[0]] ** 2
        elif term.kind == INTERACTION:
            f, g = term.features
            if f in keep and g in keep:
                add(term, c)
            elif f in keep:
                add(Term(LINEAR, (f,)), c * z_of[g])
            elif g in keep:
                add(Term(LINEAR, (g,)), c * z_of[f])
            else:
                intercept += c * z_of[f] * z_of[g]
        else:
            if term.features[0] in keep:
                add(term, c)
            else:
                intercept += c * (1.0 if level_of[term.features[0]] == term.level else 0.0)

    return SurrogateModel(
        family=model.family,
        terms=order,
        coefficients=np.array([merged[t] for t in order]),
        intercept=intercept,
        center=model.center,
        center_response=model.center_response,
        centered=model.centered,
        dataset=ds,
        fit_stats=None,
        method=model.method,
    )
