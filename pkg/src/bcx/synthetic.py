"""Synthetic observation pool: uniform numeric sampling, frequency-matched
categorical sampling, labelled by the classifier in bounded chunks."""
from __future__ import annotations

import csv

import numpy as np

from .errors import ConfigError


class SyntheticPool:
    """Labelled synthetic observations stored columnar (raw units + level codes)."""

    def __init__(self, dataset, num, cat, probabilities, seed):
        self.dataset = dataset
        self.num = num
        self.cat = cat
        self.probabilities = probabilities
        self.seed = seed

    def __len__(self):
        return self.num.shape[0] if self.num.ndim == 2 else len(self.probabilities)

    @property
    def observations(self):
        return self.dataset.decode_batch(self.num, self.cat)

    def observation(self, i):
        return self.dataset.decode_batch(self.num[i : i + 1], self.cat[i : i + 1])[0]

    def to_csv(self, path):
        """Audit export: feature columns plus one probability column per class."""
        ds = self.dataset
        header = ds.feature_names + [f"p_{c}" for c in ds.class_names]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            obs = self.observations
            for o, p in zip(obs, self.probabilities):
                writer.writerow([*(repr(v) if isinstance(v, float) else v for v in o),
                                 *(repr(float(q)) for q in p)])


def generate(ds, m, count, seed, chunk=1000):
    """Sample ``count`` observations within training bounds and label them via m.

    Numeric features draw uniformly on [train_min, train_max]; categorical
    features draw levels in proportion to training frequencies. Sampling is
    feature-major from a single seeded generator, so a seed fixes the pool.
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    rng = np.random.default_rng(seed)
    num = np.empty((count, len(ds.numeric_indices)))
    for j, fi in enumerate(ds.numeric_indices):
        spec = ds.features[fi]
        num[:, j] = rng.uniform(spec.train_min, spec.train_max, size=count)
    cat = np.empty((count, len(ds.categorical_indices)), dtype=np.int64)
    for j, fi in enumerate(ds.categorical_indices):
        spec = ds.features[fi]
        freqs = np.array([spec.level_frequencies[lv] for lv in spec.levels])
        cat[:, j] = rng.choice(len(spec.levels), size=count, p=freqs)

    probs = np.empty((count, m.class_count))
    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        probs[start:stop] = m.predict_encoded(num[start:stop], cat[start:stop])
    return SyntheticPool(ds, num, cat, probs, seed)
