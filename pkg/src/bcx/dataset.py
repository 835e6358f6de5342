"""Tabular data ingestion: feature schema, training statistics, standardization.

The statistics attached to a Dataset (ranges, means, level frequencies) bound
everything downstream: synthetic sampling, boundary search ranges, and the
feasibility test for counterfactual values. After a train/test split only the
training partition's statistics are used; the test partition carries them.

Values live in raw feature units everywhere in this module. An Observation is
a plain tuple of cell values in schema order: floats for numeric features,
level strings for categorical ones.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArityError, ConfigError, ConstantFeatureError, DataError, SchemaError

Observation = tuple

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    """One feature's declaration plus its training statistics."""

    name: str
    kind: str  # NUMERIC or CATEGORICAL
    levels: tuple = ()
    train_min: float = float("nan")
    train_max: float = float("nan")
    mean: float = float("nan")
    stddev: float = float("nan")
    level_frequencies: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"feature {self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL and not self.levels:
            raise SchemaError(f"categorical feature {self.name} declares no levels")
        if self.level_frequencies:
            total = sum(self.level_frequencies.values())
            if abs(total - 1.0) > 1e-9:
                raise SchemaError(
                    f"feature {self.name}: level frequencies sum to {total}, expected 1"
                )
        if self.train_min == self.train_min and self.train_max == self.train_max:
            if self.train_min > self.train_max:
                raise SchemaError(f"feature {self.name}: train_min > train_max")

    @property
    def is_numeric(self):
        return self.kind == NUMERIC

    @property
    def range_width(self):
        return self.train_max - self.train_min

    def level_index(self, level):
        try:
            return self.levels.index(level)
        except ValueError:
            raise DataError(f"unknown level {level!r} for feature {self.name}") from None


class Dataset:
    """Immutable table of rows with schema, statistics and class labels.

    Columns are stored as numpy arrays (float64 for numeric, int32 level
    codes for categorical). ``stats`` may be supplied to attach another
    partition's statistics instead of recomputing them from the rows.
    """

    def __init__(self, features, columns, labels, class_names, stats=None):
        if len(features) != len(columns):
            raise SchemaError("feature count does not match column count")
        self._declared = list(features)
        self._columns = [np.asarray(c) for c in columns]
        n = len(self._columns[0]) if self._columns else 0
        for spec, col in zip(self._declared, self._columns):
            if len(col) != n:
                raise SchemaError(f"column {spec.name} has inconsistent length")
        self.labels = np.asarray(labels, dtype=np.int64)
        if len(self.labels) != n:
            raise SchemaError("label count does not match row count")
        self.class_names = list(class_names)
        if stats is not None:
            self.features = list(stats)
        else:
            self.features = [self._with_stats(s, c) for s, c in zip(self._declared, self._columns)]
        self._index = {s.name: i for i, s in enumerate(self.features)}
        self.numeric_indices = [i for i, s in enumerate(self.features) if s.is_numeric]
        self.categorical_indices = [i for i, s in enumerate(self.features) if not s.is_numeric]

    @staticmethod
    def _with_stats(spec, col):
        if spec.is_numeric:
            col = np.asarray(col, dtype=np.float64)
            return replace(
                spec,
                train_min=float(col.min()),
                train_max=float(col.max()),
                mean=float(col.mean()),
                stddev=float(col.std()),
            )
        codes = np.asarray(col, dtype=np.int64)
        counts = np.bincount(codes, minlength=len(spec.levels)).astype(float)
        freqs = counts / counts.sum()
        return replace(spec, level_frequencies={lv: float(f) for lv, f in zip(spec.levels, freqs)})

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self):
        return len(self.features)

    @property
    def feature_names(self):
        return [s.name for s in self.features]

    @property
    def class_count(self):
        return len(self.class_names)

    def feature(self, name):
        try:
            return self.features[self._index[name]]
        except KeyError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def feature_index(self, name):
        if name not in self._index:
            raise SchemaError(f"unknown feature {name!r}")
        return self._index[name]

    def column(self, i):
        return self._columns[i]

    def observation(self, i) -> Observation:
        vals = []
        for spec, col in zip(self.features, self._columns):
            vals.append(float(col[i]) if spec.is_numeric else spec.levels[int(col[i])])
        return tuple(vals)

    def observations(self, indices=None):
        idx = range(len(self)) if indices is None else indices
        return [self.observation(i) for i in idx]

    # -- batch encoding -------------------------------------------------

    def validate_observation(self, obs):
        if len(obs) != self.n_features:
            raise ArityError(
                f"observation has {len(obs)} values, schema expects {self.n_features}"
            )
        for spec, v in zip(self.features, obs):
            if not spec.is_numeric:
                spec.level_index(v)

    def encode_batch(self, batch):
        """List of Observations -> (raw numeric matrix, categorical code matrix)."""
        n = len(batch)
        num = np.empty((n, len(self.numeric_indices)), dtype=np.float64)
        cat = np.empty((n, len(self.categorical_indices)), dtype=np.int64)
        for r, obs in enumerate(batch):
            if len(obs) != self.n_features:
                raise ArityError(
                    f"observation has {len(obs)} values, schema expects {self.n_features}"
                )
            for j, fi in enumerate(self.numeric_indices):
                num[r, j] = float(obs[fi])
            for j, fi in enumerate(self.categorical_indices):
                cat[r, j] = self.features[fi].level_index(obs[fi])
        return num, cat

    def decode_batch(self, num, cat):
        """Inverse of encode_batch: matrices -> list of Observations."""
        out = []
        for r in range(num.shape[0]):
            vals = [None] * self.n_features
            for j, fi in enumerate(self.numeric_indices):
                vals[fi] = float(num[r, j])
            for j, fi in enumerate(self.categorical_indices):
                vals[fi] = self.features[fi].levels[int(cat[r, j])]
            out.append(tuple(vals))
        return out

    def numeric_stats(self):
        """(mins, maxs, means, stds) arrays over numeric features, schema order."""
        specs = [self.features[i] for i in self.numeric_indices]
        return (
            np.array([s.train_min for s in specs]),
            np.array([s.train_max for s in specs]),
            np.array([s.mean for s in specs]),
            np.array([s.stddev for s in specs]),
        )

    def standardize_numeric(self, num):
        """Raw numeric matrix -> standardized, using training statistics."""
        _, _, means, stds = self.numeric_stats()
        bad = [
            self.features[fi].name
            for fi, s in zip(self.numeric_indices, stds)
            if s <= 0.0
        ]
        if bad:
            raise ConstantFeatureError(
                f"stddev is zero for feature(s): {', '.join(bad)}"
            )
        return (num - means) / stds

    def unstandardize_numeric(self, z):
        _, _, means, stds = self.numeric_stats()
        return z * stds + means


# -- schema sidecar ------------------------------------------------------


def load_schema(path):
    """Parse the schema sidecar file.

    One directive per line::

        numeric <name>
        categorical <name> levels=<a,b,c>
        label <column> [classes=<x,y>]

    Blank lines and ``#`` comments are ignored. Returns
    (declared FeatureSpec list, label column name, class names or None).
    """
    specs, label, classes = [], None, None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            kind = parts[0]
            if kind == "label":
                if len(parts) < 2:
                    raise SchemaError(f"{path}:{lineno}: label directive needs a column name")
                label = parts[1]
                for extra in parts[2:]:
                    if extra.startswith("classes="):
                        classes = extra[len("classes=") :].split(",")
                    else:
                        raise SchemaError(f"{path}:{lineno}: unknown option {extra!r}")
            elif kind == NUMERIC:
                if len(parts) != 2:
                    raise SchemaError(f"{path}:{lineno}: numeric directive takes one name")
                specs.append(FeatureSpec(parts[1], NUMERIC))
            elif kind == CATEGORICAL:
                if len(parts) != 3 or not parts[2].startswith("levels="):
                    raise SchemaError(
                        f"{path}:{lineno}: categorical directive needs levels=<a,b,...>"
                    )
                levels = tuple(parts[2][len("levels=") :].split(","))
                specs.append(FeatureSpec(parts[1], CATEGORICAL, levels=levels))
            else:
                raise SchemaError(f"{path}:{lineno}: unknown directive {kind!r}")
    if label is None:
        raise SchemaError(f"{path}: no label directive")
    if not specs:
        raise SchemaError(f"{path}: no feature directives")
    return specs, label, classes


def load_csv(path, schema, label_column, class_names=None):
    """Load a UTF-8 CSV with header into a Dataset.

    ``schema`` is the declared FeatureSpec list (stats ignored); statistics
    are computed from the loaded rows. Row numbers in errors are 1-based
    data rows (the header is row 0).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        col_of = {}
        for spec in schema:
            if spec.name not in header:
                raise SchemaError(f"{path}: missing column {spec.name!r}")
            col_of[spec.name] = header.index(spec.name)
        if label_column not in header:
            raise SchemaError(f"{path}: missing label column {label_column!r}")
        label_idx = header.index(label_column)

        columns = [[] for _ in schema]
        raw_labels = []
        for rowno, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError("wrong cell count", row=rowno)
            for j, spec in enumerate(schema):
                cell = row[col_of[spec.name]].strip()
                if spec.is_numeric:
                    try:
                        columns[j].append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"unparseable numeric value {cell!r}",
                            row=rowno,
                            column=spec.name,
                        ) from None
                else:
                    if cell not in spec.levels:
                        raise DataError(
                            f"unknown level {cell!r}", row=rowno, column=spec.name
                        )
                    columns[j].append(spec.levels.index(cell))
            raw_labels.append(row[label_idx].strip())

    if not raw_labels:
        raise DataError(f"{path}: no data rows")
    if class_names is None:
        class_names = sorted(set(raw_labels))
    unknown = set(raw_labels) - set(class_names)
    if unknown:
        raise DataError(f"labels outside declared classes: {sorted(unknown)}")
    label_code = {c: i for i, c in enumerate(class_names)}
    labels = [label_code[v] for v in raw_labels]
    cols = [
        np.array(c, dtype=np.float64 if s.is_numeric else np.int64)
        for s, c in zip(schema, columns)
    ]
    return Dataset(schema, cols, labels, class_names)


# -- operations ----------------------------------------------------------


def standardize(obs, ds):
    """Map numeric values to (v - mean) / stddev; categorical values pass through."""
    ds.validate_observation(obs)
    out = []
    for spec, v in zip(ds.features, obs):
        if spec.is_numeric:
            if spec.stddev <= 0.0:
                raise ConstantFeatureError(
                    f"stddev is zero for feature(s): {spec.name}"
                )
            out.append((float(v) - spec.mean) / spec.stddev)
        else:
            out.append(v)
    return tuple(out)


def unstandardize(obs, ds):
    out = []
    for spec, v in zip(ds.features, obs):
        out.append(float(v) * spec.stddev + spec.mean if spec.is_numeric else v)
    return tuple(out)


def split(ds, test_fraction, seed):
    """Seeded shuffle split into (train, test).

    The training partition recomputes its statistics; the test partition
    carries the training statistics, so test rows may fall outside ranges.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(ds)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ConfigError(f"test_fraction {test_fraction} leaves an empty partition for {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]

    def take(indices, stats):
        cols = [c[indices] for c in ds._columns]
        return Dataset(ds._declared, cols, ds.labels[indices], ds.class_names, stats=stats)

    train = take(train_idx, None)
    test = take(test_idx, train.features)
    return train, test
