"""Online feature selection producing binary active-feature vectors."""

from __future__ import annotations

import copy
import math

import numpy as np

from .stream import Batch


def top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """0/1 vector marking the ``k`` largest scores; ties go to the lower index."""
    order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    bits = np.zeros(len(scores), dtype=np.int8)
    bits[order[:k]] = 1
    return bits


def apply_selection(batch: Batch, selection: np.ndarray) -> Batch:
    """Zero the columns of unselected features; the width is kept."""
    selection = np.asarray(selection)
    if selection.shape != (batch.features.shape[1],):
        raise ValueError(f"selection length {selection.shape} does not match "
                         f"{batch.features.shape[1]} features")
    masked = np.where(selection != 0, batch.features, 0.0)
    return Batch(batch.step, masked, batch.labels, batch.offset)


class OFS:
    """Online feature selection by truncated perceptron-style updates.

    On each misclassified row the weights shrink by ``1 - lr*reg``, take a
    step toward the row, are projected onto the L2 ball of radius
    ``1/sqrt(reg)`` and are then truncated to the ``k`` largest magnitudes.
    """

    def __init__(self, n_features: int, k: int, learning_rate: float = 0.2,
                 regularization: float = 0.01):
        if not 1 <= k <= n_features:
            raise ValueError(f"k must lie in [1, {n_features}], got {k}")
        self.n_features = n_features
        self.k = k
        self.learning_rate = learning_rate
        self.regularization = regularization
        self.reset()

    def reset(self) -> "OFS":
        self.weights = np.zeros(self.n_features)
        return self

    def clone(self) -> "OFS":
        return copy.deepcopy(self)

    @property
    def radius(self) -> float:
        return 1.0 / math.sqrt(self.regularization)

    def selection(self) -> np.ndarray:
        return top_k(np.abs(self.weights), self.k)

    def update_select(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("OFS requires binary labels 0/1")
        eta, lam = self.learning_rate, self.regularization
        w = self.weights
        for x, label in zip(X, y):
            sign = 2.0 * label - 1.0
            if sign * (x @ w) > 0:
                continue
            w = (1.0 - eta * lam) * w + eta * sign * x
            norm = np.linalg.norm(w)
            if norm > self.radius:
                w = w * (self.radius / norm)
            w = w * top_k(np.abs(w), self.k)
        self.weights = w
        return self.selection()


SELECTORS = {"ofs": OFS}


def make_selector(kind: str, n_features: int, **params) -> OFS:
    try:
        cls = SELECTORS[kind]
    except KeyError:
        raise ValueError(f"unknown selector kind {kind!r}") from None
    return cls(n_features, **params)
