"""Black-box classifier contract and the handles that satisfy it.

A ClassifierHandle maps batches of observations to class-probability rows.
Three families are provided: analytic handles with closed-form boundaries
(for oracle testing), desk-scale built-in trainers (softmax regression and a
one-hidden-layer MLP), and an adapter that proxies an external process over
a line protocol. All handles are deterministic at prediction time.
"""
from __future__ import annotations

import subprocess
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NormalizationError,
    ProtocolError,
    SingleClassError,
    TrainingDivergedError,
    TransportError,
)

PROB_ATOL = 1e-6


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class ClassifierHandle:
    """Probability-prediction contract: batch of observations -> (n, k) rows.

    Subclasses implement ``_predict_encoded(num, cat)`` on raw numeric
    matrices and categorical level codes; encoding/decoding and the
    row-normalization invariant live here.
    """

    def __init__(self, dataset, class_count):
        self.dataset = dataset
        self.class_count = int(class_count)

    def predict_proba(self, batch):
        num, cat = self.dataset.encode_batch(batch)
        return self.predict_encoded(num, cat)

    def predict_encoded(self, num, cat):
        probs = np.asarray(self._predict_encoded(num, cat), dtype=np.float64)
        if probs.shape != (num.shape[0], self.class_count):
            raise ProtocolError(
                f"prediction shape {probs.shape} does not match "
                f"({num.shape[0]}, {self.class_count})"
            )
        return probs

    def _predict_encoded(self, num, cat):
        raise NotImplementedError

    def close(self):
        pass


def predict_proba(handle, batch):
    """Operation form of ClassifierHandle.predict_proba."""
    return handle.predict_proba(batch)


# -- analytic handles (known boundaries, used as oracles) -----------------


class AnalyticLogisticHandle(ClassifierHandle):
    """Binary handle with p(class 1) = sigmoid(bias + weights . numeric values).

    Weights apply to raw numeric features in schema order; categorical
    features are ignored. The decision boundary is the known hyperplane
    bias + w.v = 0, which makes this handle an exact oracle for search and
    fidelity tests.
    """

    def __init__(self, dataset, weights, bias=0.0):
        super().__init__(dataset, 2)
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.shape != (len(dataset.numeric_indices),):
            raise ValueError("one weight per numeric feature required")
        self.bias = float(bias)

    def _predict_encoded(self, num, cat):
        p1 = _sigmoid(num @ self.weights + self.bias)
        return np.column_stack([1.0 - p1, p1])


class AnalyticCircleHandle(ClassifierHandle):
    """Binary handle with a spherical boundary: p(class 1) = sigmoid(gain * (r^2 - |v - c|^2)).

    Class 1 occupies the inside of the sphere; the boundary is exactly the
    sphere of radius r around the centre.
    """

    def __init__(self, dataset, center, radius, gain=4.0):
        super().__init__(dataset, 2)
        self.center = np.asarray(center, dtype=np.float64)
        if self.center.shape != (len(dataset.numeric_indices),):
            raise ValueError("one centre coordinate per numeric feature required")
        self.radius = float(radius)
        self.gain = float(gain)

    def _predict_encoded(self, num, cat):
        d2 = ((num - self.center) ** 2).sum(axis=1)
        p1 = _sigmoid(self.gain * (self.radius**2 - d2))
        return np.column_stack([1.0 - p1, p1])


# -- built-in trainers -----------------------------------------------------


@dataclass
class BuiltinModelConfig:
    family: str = "mlp_softmax"  # or "logistic_linear"
    hidden_units: int = 16
    epochs: int = 400
    learning_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("logistic_linear", "mlp_softmax"):
            raise ValueError(f"unknown model family {self.family!r}")
        if self.family == "mlp_softmax" and self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class BuiltinHandle(ClassifierHandle):
    """Trained softmax model over standardized numeric + one-hot categorical inputs."""

    def __init__(self, dataset, params, hidden):
        super().__init__(dataset, dataset.class_count)
        self.params = params
        self.hidden = hidden
        self.training_accuracy = None

    def _design(self, num, cat):
        z = self.dataset.standardize_numeric(num)
        blocks = [z]
        for j, fi in enumerate(self.dataset.categorical_indices):
            spec = self.dataset.features[fi]
            onehot = np.zeros((num.shape[0], len(spec.levels)))
            onehot[np.arange(num.shape[0]), cat[:, j]] = 1.0
            blocks.append(onehot)
        return np.hstack(blocks)

    def _predict_encoded(self, num, cat):
        a = self._design(num, cat)
        if self.hidden:
            w1, b1, w2, b2 = self.params
            a = np.tanh(a @ w1 + b1)
            logits = a @ w2 + b2
        else:
            w, b = self.params
            logits = a @ w + b
        return _softmax(logits)


def train_builtin(ds, cfg):
    """Full-batch gradient-descent trainer for the built-in families.

    Deterministic for a fixed config seed. Raises SingleClassError when the
    dataset holds fewer than two represented classes and
    TrainingDivergedError on a non-finite loss.
    """
    present = np.unique(ds.labels)
    if ds.class_count < 2 or len(present) < 2:
        raise SingleClassError(
            f"training needs >= 2 classes with rows, found {len(present)}"
        )
    handle = BuiltinHandle(ds, None, hidden=cfg.family == "mlp_softmax")
    num = np.column_stack([ds.column(i) for i in ds.numeric_indices]) if ds.numeric_indices else np.zeros((len(ds), 0))
    cat = np.column_stack([ds.column(i) for i in ds.categorical_indices]) if ds.categorical_indices else np.zeros((len(ds), 0), dtype=np.int64)
    X = handle._design(num, cat.astype(np.int64))
    n, d = X.shape
    k = ds.class_count
    onehot = np.zeros((n, k))
    onehot[np.arange(n), ds.labels] = 1.0

    rng = np.random.default_rng(cfg.seed)
    if handle.hidden:
        h = cfg.hidden_units
        w1 = rng.normal(0.0, 1.0 / np.sqrt(max(d, 1)), size=(d, h))
        b1 = np.zeros(h)
        w2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, k))
        b2 = np.zeros(k)
        for _ in range(cfg.epochs):
            hidden_act = np.tanh(X @ w1 + b1)
            probs = _softmax(hidden_act @ w2 + b2)
            loss = -np.mean(np.sum(onehot * np.log(np.clip(probs, 1e-12, None)), axis=1))
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss {loss}")
            g_logits = (probs - onehot) / n
            g_w2 = hidden_act.T @ g_logits
            g_b2 = g_logits.sum(axis=0)
            g_hidden = (g_logits @ w2.T) * (1.0 - hidden_act**2)
            g_w1 = X.T @ g_hidden
            g_b1 = g_hidden.sum(axis=0)
            w1 -= cfg.learning_rate * g_w1
            b1 -= cfg.learning_rate * g_b1
            w2 -= cfg.learning_rate * g_w2
            b2 -= cfg.learning_rate * g_b2
        handle.params = (w1, b1, w2, b2)
    else:
        w = rng.normal(0.0, 1.0 / np.sqrt(max(d, 1)), size=(d, k))
        b = np.zeros(k)
        for _ in range(cfg.epochs):
            probs = _softmax(X @ w + b)
            loss = -np.mean(np.sum(onehot * np.log(np.clip(probs, 1e-12, None)), axis=1))
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss {loss}")
            g_logits = (probs - onehot) / n
            w -= cfg.learning_rate * (X.T @ g_logits)
            b -= cfg.learning_rate * g_logits.sum(axis=0)
        handle.params = (w, b)

    preds = handle.predict_encoded(num, cat.astype(np.int64)).argmax(axis=1)
    handle.training_accuracy = float(np.mean(preds == ds.labels))
    return handle


# -- external process adapter ----------------------------------------------


class ExternalProcessHandle(ClassifierHandle):
    """Adapter for a model served by a child process over its standard streams.

    Protocol, bit-exact: a batch request is one line per observation, the
    raw feature values in schema order joined by commas (categoricals as
    level strings, numerics via repr), followed by one empty line. The
    response is one line per observation, the class probabilities joined by
    commas, followed by one empty line. Lines end with "\\n".

    Rows that sum to 1 within 1e-3 are renormalized with a warning; worse
    rows raise NormalizationError. Process death raises TransportError;
    malformed responses raise ProtocolError. Batches are serialized through
    a lock, so a handle may be shared across threads.
    """

    def __init__(self, dataset, class_count, command):
        super().__init__(dataset, class_count)
        self.command = list(command)
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"could not launch {self.command}: {exc}") from exc

    def _predict_encoded(self, num, cat):
        obs = self.dataset.decode_batch(num, cat)
        lines = []
        for o in obs:
            cells = [v if isinstance(v, str) else repr(float(v)) for v in o]
            lines.append(",".join(cells))
        request = "\n".join(lines) + "\n\n"
        with self._lock:
            if self._proc.poll() is not None:
                raise TransportError(f"model process exited with {self._proc.returncode}")
            try:
                self._proc.stdin.write(request)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise TransportError(f"write to model process failed: {exc}") from exc
            rows = []
            for _ in range(len(obs)):
                line = self._proc.stdout.readline()
                if line == "":
                    raise TransportError("model process closed its output mid-batch")
                line = line.strip()
                if line == "":
                    raise ProtocolError("blank line before batch was complete")
                try:
                    row = [float(v) for v in line.split(",")]
                except ValueError:
                    raise ProtocolError(f"unparseable probability line {line!r}") from None
                rows.append(row)
            term = self._proc.stdout.readline()
            if term == "":
                raise TransportError("model process closed its output before terminator")
            if term.strip() != "":
                raise ProtocolError("missing blank-line batch terminator")
        probs = np.array(rows, dtype=np.float64)
        if probs.shape[1] != self.class_count:
            raise ProtocolError(
                f"expected {self.class_count} probabilities per line, got {probs.shape[1]}"
            )
        if probs.min() < -1e-9 or probs.max() > 1.0 + 1e-9:
            raise ProtocolError("probabilities outside [0, 1]")
        sums = probs.sum(axis=1)
        off = np.abs(sums - 1.0)
        if np.any(off > 1e-3):
            worst = float(off.max())
            raise NormalizationError(f"probability row sums off by {worst:g} (> 1e-3)")
        if np.any(off > PROB_ATOL):
            warnings.warn("renormalizing probability rows off by up to "
                          f"{float(off.max()):g}", stacklevel=2)
            probs = probs / sums[:, None]
        return probs

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            proc.kill()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def wrap_external(dataset, class_count, command):
    """Launch ``command`` and return a handle speaking the line protocol."""
    return ExternalProcessHandle(dataset, class_count, command)
