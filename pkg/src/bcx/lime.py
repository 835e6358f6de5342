"""Kernel-weighted linear baseline explainer.

Generates (or reuses) a synthetic pool, weights every point by
sqrt(exp(-d^2 / width^2)) of its standardized distance to x, and fits an
uncentered weighted multiple regression restricted to first-order terms.
The result flows through the same estimation and fidelity pipeline as the
main explainer, which is exactly how its counterfactual fidelity gets
measured.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .neighbourhood import NeighbourhoodDataset, _distances, band_index
from .surrogate import MULTIPLE, candidate_terms, fit
from .synthetic import generate

DEFAULT_KERNEL_WIDTH = 2.0
DEFAULT_SAMPLE_COUNT = 15000
WIDTH_SWEEP = (1.5, 2.0, 3.0, 4.0)


@dataclass
class KernelConfig:
    kernel_width: float = DEFAULT_KERNEL_WIDTH
    sample_count: int = DEFAULT_SAMPLE_COUNT

    def __post_init__(self):
        if self.kernel_width <= 0:
            raise ConfigError("kernel_width must be positive")
        if self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1")


def kernel_weight(d, width):
    """sqrt(exp(-d^2 / width^2)); 1 at zero distance, decreasing in d."""
    if width <= 0:
        raise ConfigError("kernel width must be positive")
    return np.sqrt(np.exp(-np.square(d) / (width * width)))


def lime_explain(x, m, ds, cfg=None, max_terms=14, target_class=1, pool=None, seed=0):
    """Weighted linear surrogate over the full synthetic pool, no centering.

    ``pool`` may be supplied (batch runs reuse one pool per seed); otherwise
    cfg.sample_count points are generated with the given seed. The returned
    model is flagged method="lime", family=multiple, uncentered.
    """
    cfg = cfg or KernelConfig()
    if pool is None:
        pool = generate(ds, m, cfg.sample_count, seed)
    d2 = _distances(pool, x)
    weights = kernel_weight(np.sqrt(d2), cfg.kernel_width)
    responses = pool.probabilities[:, target_class]
    nbd = NeighbourhoodDataset(
        ds, target_class, pool.num, pool.cat, responses, weights,
        band_index(responses, 0.4, 0.6), balanced=False, b1=0.4, b2=0.6,
    )
    y_x = float(m.predict_proba([x])[0][target_class])
    linear_pool = candidate_terms(ds, use_quadratic=False, use_interaction=False)
    return fit(
        nbd, x, y_x,
        family=MULTIPLE,
        max_terms=max_terms,
        centering=False,
        terms=linear_pool,
        method="lime",
    )
