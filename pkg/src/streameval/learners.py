"""Online predictors treated as black boxes by the pipelines."""

from __future__ import annotations

import copy
from typing import Sequence

import numpy as np


def _as_weights(weight, n: int) -> np.ndarray:
    if weight is None:
        return np.ones(n, dtype=np.int64)
    w = np.broadcast_to(np.asarray(weight), (n,)).astype(np.int64)
    if (w < 0).any():
        raise ValueError("sample weights must be non-negative integers")
    return w


class OnlinePredictor:
    """Contract: ``predict`` is pure, ``partial_fit`` learns, ``reset`` forgets.

    A weight of ``k`` on a row means the row is applied ``k`` times in a row.
    """

    n_features: int
    classes: tuple[int, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def partial_fit(self, X: np.ndarray, y: np.ndarray, weight=None) -> "OnlinePredictor":
        raise NotImplementedError

    def reset(self) -> "OnlinePredictor":
        raise NotImplementedError

    def clone(self) -> "OnlinePredictor":
        return copy.deepcopy(self)

    def state(self) -> dict:
        """Snapshot of every learned quantity (used for purity audits)."""
        raise NotImplementedError

    def _check_width(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return X


class Perceptron(OnlinePredictor):
    """Binary perceptron updated on misclassified rows only."""

    classes = (0, 1)

    def __init__(self, n_features: int, learning_rate: float = 1.0):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.n_features = n_features
        self.learning_rate = learning_rate
        self.reset()

    def reset(self):
        self.weights = np.zeros(self.n_features)
        self.bias = 0.0
        return self

    def predict(self, X):
        X = self._check_width(X)
        return (X @ self.weights + self.bias > 0).astype(np.int64)

    def partial_fit(self, X, y, weight=None):
        X = self._check_width(X)
        y = np.asarray(y)
        if not np.isin(y, (0, 1)).all():
            raise ValueError("perceptron labels must be 0 or 1")
        weights = _as_weights(weight, len(y))
        lr = self.learning_rate
        for x, label, k in zip(X, y, weights):
            sign = 2.0 * label - 1.0
            for _ in range(k):
                pred = 1 if x @ self.weights + self.bias > 0 else 0
                if pred != label:
                    self.weights = self.weights + lr * sign * x
                    self.bias = self.bias + lr * sign
        return self

    def state(self):
        return {"weights": self.weights.copy(), "bias": self.bias}


class GaussianNB(OnlinePredictor):
    """Multiclass Gaussian naive Bayes with per-class Welford statistics."""

    def __init__(self, n_features: int, classes: Sequence[int], var_floor: float = 1e-9):
        if len(classes) < 1:
            raise ValueError("at least one class is required")
        self.n_features = n_features
        self.classes = tuple(int(c) for c in classes)
        self.var_floor = var_floor
        self._index = {c: i for i, c in enumerate(self.classes)}
        self.reset()

    def reset(self):
        c, m = len(self.classes), self.n_features
        self.counts = np.zeros(c)
        self.means = np.zeros((c, m))
        self.m2 = np.zeros((c, m))
        return self

    @property
    def variances(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts[:, None] > 0, self.m2 / self.counts[:, None], 0.0)

    def predict(self, X):
        X = self._check_width(X)
        seen = self.counts > 0
        if not seen.any():
            return np.full(len(X), self.classes[0], dtype=np.int64)
        var = np.maximum(self.variances, self.var_floor)
        log_prior = np.full(len(self.classes), -np.inf)
        log_prior[seen] = np.log(self.counts[seen] / self.counts.sum())
        # n x c log-likelihood; unseen classes keep -inf and never win
        diff = X[:, None, :] - self.means[None, :, :]
        loglik = -0.5 * (np.log(2 * np.pi * var)[None] + diff ** 2 / var[None]).sum(axis=2)
        scores = np.where(seen[None, :], loglik + log_prior[None, :], -np.inf)
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(scores, axis=1)]

    def partial_fit(self, X, y, weight=None):
        X = self._check_width(X)
        y = np.asarray(y)
        weights = _as_weights(weight, len(y))
        for x, label, k in zip(X, y, weights):
            try:
                c = self._index[int(label)]
            except KeyError:
                raise ValueError(f"unknown class id {label!r}; known: {self.classes}") from None
            for _ in range(k):
                self.counts[c] += 1
                delta = x - self.means[c]
                self.means[c] = self.means[c] + delta / self.counts[c]
                self.m2[c] = self.m2[c] + delta * (x - self.means[c])
        return self

    def state(self):
        return {"counts": self.counts.copy(), "means": self.means.copy(), "m2": self.m2.copy()}


class MajorityClass(OnlinePredictor):
    """Predicts the most frequent class seen so far (lowest id on ties)."""

    def __init__(self, n_features: int, classes: Sequence[int]):
        self.n_features = n_features
        self.classes = tuple(int(c) for c in classes)
        self.reset()

    def reset(self):
        self.counts = np.zeros(len(self.classes))
        return self

    def predict(self, X):
        X = self._check_width(X)
        return np.full(len(X), self.classes[int(np.argmax(self.counts))], dtype=np.int64)

    def partial_fit(self, X, y, weight=None):
        self._check_width(X)
        weights = _as_weights(weight, len(y))
        for label, k in zip(np.asarray(y), weights):
            self.counts[self.classes.index(int(label))] += k
        return self

    def state(self):
        return {"counts": self.counts.copy()}


LEARNERS = {
    "perceptron": lambda n_features, classes, **kw: Perceptron(n_features, **kw),
    "gaussian_nb": lambda n_features, classes, **kw: GaussianNB(n_features, classes, **kw),
    "majority": lambda n_features, classes, **kw: MajorityClass(n_features, classes, **kw),
}


def make_learner(kind: str, n_features: int, classes: Sequence[int], **params) -> OnlinePredictor:
    try:
        factory = LEARNERS[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}") from None
    return factory(n_features, classes, **params)
