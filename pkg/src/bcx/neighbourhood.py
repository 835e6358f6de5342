"""Neighbourhood selection around an observation.

The balanced variant draws the nearest pool points per probability band so
the regression sees the region from x across the decision boundary, split
over the three bands (0, b1], (b1, b2], (b2, 1] of target-class probability.
Distances are Euclidean in standardized numeric space; each differing
categorical level adds 1 to the squared distance.
"""
from __future__ import annotations

import csv

import numpy as np

from ._core import sq_distances
from .errors import BandStarvationError, ConfigError

DEFAULT_B1 = 0.4
DEFAULT_B2 = 0.6
DEFAULT_N = 200
CF_WEIGHT = 10.0


class NeighbourhoodDataset:
    """Selected points with responses (target-class probability), weights and bands."""

    def __init__(self, dataset, target_class, num, cat, responses, weights,
                 band_of, balanced, b1, b2, cf_mask=None, shortfall=None):
        self.dataset = dataset
        self.target_class = int(target_class)
        self.num = num
        self.cat = cat
        self.responses = responses
        self.weights = weights
        self.band_of = band_of
        self.balanced = balanced
        self.b1 = b1
        self.b2 = b2
        self.cf_mask = cf_mask if cf_mask is not None else np.zeros(len(responses), dtype=bool)
        self.shortfall = dict(shortfall or {})

    def __len__(self):
        return len(self.responses)

    @property
    def points(self):
        return self.dataset.decode_batch(self.num, self.cat)

    def to_csv(self, path):
        ds = self.dataset
        header = ds.feature_names + ["response", "weight", "band", "is_counterfactual"]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for o, r, w, b, c in zip(self.points, self.responses, self.weights,
                                     self.band_of, self.cf_mask):
                writer.writerow([*(repr(v) if isinstance(v, float) else v for v in o),
                                 repr(float(r)), repr(float(w)), int(b), int(c)])


def _distances(pool, x):
    ds = pool.dataset
    x_num, x_cat = ds.encode_batch([x])
    z_pool = ds.standardize_numeric(pool.num)
    z_x = ds.standardize_numeric(x_num)[0]
    d2 = sq_distances(np.ascontiguousarray(z_pool), np.ascontiguousarray(z_x))
    if pool.cat.shape[1]:
        d2 = d2 + (pool.cat != x_cat[0]).sum(axis=1).astype(np.float64)
    return d2


def band_quotas(n):
    """Per-band sizes for a target of n points: floor(n/3) to the low band,
    the remainder split evenly with the upper bands taking any extra
    (n=200 -> 66/67/67)."""
    q1 = n // 3
    q2 = (n - q1) // 2
    return q1, q2, n - q1 - q2


def band_index(responses, b1, b2):
    """0 for (0, b1], 1 for (b1, b2], 2 for (b2, 1]; -1 for response <= 0."""
    resp = np.asarray(responses)
    out = np.full(resp.shape, -1, dtype=np.int64)
    out[(resp > 0) & (resp <= b1)] = 0
    out[(resp > b1) & (resp <= b2)] = 1
    out[(resp > b2) & (resp <= 1)] = 2
    return out


def balanced_neighbourhood(pool, x, target_class, b1=DEFAULT_B1, b2=DEFAULT_B2, n=DEFAULT_N):
    """Nearest pool points per probability band, quotas per ``band_quotas``.

    A band with some but too few points contributes all of them (the
    shortfall is recorded); a band with none raises BandStarvationError.
    Ties in distance resolve by pool index order.
    """
    if not 0.0 < b1 < b2 < 1.0:
        raise ConfigError(f"need 0 < b1 < b2 < 1, got b1={b1}, b2={b2}")
    if n < 3:
        raise ConfigError("n must be >= 3")
    responses = pool.probabilities[:, target_class]
    d2 = _distances(pool, x)
    order = np.argsort(d2, kind="stable")
    bands = band_index(responses, b1, b2)
    quotas = band_quotas(n)
    edges = [(0.0, b1), (b1, b2), (b2, 1.0)]
    chosen = []
    shortfall = {}
    for band, quota in enumerate(quotas):
        members = order[bands[order] == band]
        if members.size == 0:
            raise BandStarvationError(band, *edges[band], pool_count=0)
        take = members[:quota]
        if take.size < quota:
            shortfall[band] = quota - take.size
        chosen.append(take)
    idx = np.concatenate(chosen)
    return NeighbourhoodDataset(
        pool.dataset, target_class,
        pool.num[idx].copy(), pool.cat[idx].copy(),
        responses[idx].copy(), np.ones(idx.size), bands[idx].copy(),
        balanced=True, b1=b1, b2=b2, shortfall=shortfall,
    )


def imbalanced_neighbourhood(pool, x, target_class, n=DEFAULT_N, b1=DEFAULT_B1, b2=DEFAULT_B2):
    """The n nearest pool points regardless of band."""
    if n > len(pool):
        raise ConfigError(f"n={n} exceeds pool size {len(pool)}")
    responses = pool.probabilities[:, target_class]
    d2 = _distances(pool, x)
    idx = np.argsort(d2, kind="stable")[:n]
    bands = band_index(responses[idx], b1, b2)
    return NeighbourhoodDataset(
        pool.dataset, target_class,
        pool.num[idx].copy(), pool.cat[idx].copy(),
        responses[idx].copy(), np.ones(idx.size), bands,
        balanced=False, b1=b1, b2=b2,
    )


def augment_with_counterfactuals(nbd, perturbations, m, weight=CF_WEIGHT):
    """Append boundary counterfactual points as weighted soft constraints.

    Each counterfactual point enters with the given weight (default 10) and
    its response freshly queried from the model. Returns a new neighbourhood;
    the input is left untouched.
    """
    if not perturbations:
        return nbd
    ds = nbd.dataset
    points = [bp.counterfactual_point for bp in perturbations]
    num, cat = ds.encode_batch(points)
    responses = m.predict_encoded(num, cat)[:, nbd.target_class]
    bands = band_index(responses, nbd.b1, nbd.b2)
    k = len(points)
    return NeighbourhoodDataset(
        ds, nbd.target_class,
        np.vstack([nbd.num, num]), np.vstack([nbd.cat, cat]),
        np.concatenate([nbd.responses, responses]),
        np.concatenate([nbd.weights, np.full(k, float(weight))]),
        np.concatenate([nbd.band_of, bands]),
        balanced=nbd.balanced, b1=nbd.b1, b2=nbd.b2,
        cf_mask=np.concatenate([nbd.cf_mask, np.ones(k, dtype=bool)]),
        shortfall=nbd.shortfall,
    )
