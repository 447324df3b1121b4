"""Evaluation measures for predictors, drift detectors and feature selectors.

Time steps handed to the drift-adaptability measures are positions in a
per-step loss series; detection measures work on whatever index unit the
known and detected drifts share (the pipelines use observation indices).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

LOWER_BETTER = "lower-better"
HIGHER_BETTER = "higher-better"

# slack for the restoration comparison so that float rounding of the
# pre-drift mean cannot flip an exact tie
_RESTORE_RTOL = 1e-12


@dataclass(frozen=True)
class MeasureInfo:
    id: str
    direction: str
    scope: str  # "step", "drift", "detection" or "selection"
    description: str


MEASURES: dict[str, MeasureInfo] = {m.id: m for m in [
    MeasureInfo("accuracy", HIGHER_BETTER, "step", "fraction of correct predictions"),
    MeasureInfo("zero_one", LOWER_BETTER, "step", "fraction of wrong predictions"),
    MeasureInfo("f1", HIGHER_BETTER, "step", "binary F1 score of the positive class"),
    MeasureInfo("kappa", HIGHER_BETTER, "step", "Cohen's kappa"),
    MeasureInfo("noise_variability", LOWER_BETTER, "step",
                "mean change of the reference measure under Gaussian input noise"),
    MeasureInfo("dpd", LOWER_BETTER, "drift",
                "mean reference-measure change across a known drift"),
    MeasureInfo("drt", LOWER_BETTER, "drift",
                "steps until the pre-drift mean of the reference measure is restored"),
    MeasureInfo("dcr", HIGHER_BETTER, "detection", "detected change rate"),
    MeasureInfo("fdr", LOWER_BETTER, "detection", "false discovery rate"),
    MeasureInfo("mtfa", HIGHER_BETTER, "detection", "mean time between false alarms"),
    MeasureInfo("delay", LOWER_BETTER, "detection", "mean detection delay"),
    MeasureInfo("mtr", HIGHER_BETTER, "detection", "mean time ratio"),
    MeasureInfo("fss", HIGHER_BETTER, "selection", "feature set stability over a window"),
    MeasureInfo("reduction_rate", HIGHER_BETTER, "selection",
                "fraction of features left unselected"),
]}

STEP_MEASURES = tuple(m for m, info in MEASURES.items() if info.scope == "step")
LOSS_MEASURES = ("accuracy", "zero_one", "f1", "kappa")


def direction(measure_id: str) -> str:
    return MEASURES[measure_id].direction


# --- predictive performance -------------------------------------------------

def _pair(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if y_true.size == 0:
        raise ValueError("empty label vectors")
    return y_true, y_pred


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _pair(y_true, y_pred)
    return int((y_true == y_pred).sum()) / y_true.size


def zero_one(y_true, y_pred) -> float:
    y_true, y_pred = _pair(y_true, y_pred)
    return int((y_true != y_pred).sum()) / y_true.size


def f1_binary(y_true, y_pred, zero_division: float = 0.0) -> float:
    y_true, y_pred = _pair(y_true, y_pred)
    if not (np.isin(y_true, (0, 1)).all() and np.isin(y_pred, (0, 1)).all()):
        raise ValueError("f1_binary needs labels in {0, 1}")
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    if tp + fp == 0 or tp + fn == 0:
        return zero_division
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    if precision + recall == 0:
        return zero_division
    return 2 * precision * recall / (precision + recall)


@dataclass
class ConfusionCounts:
    """``matrix[i, j]`` counts observations of true class ``classes[i]``
    predicted as ``classes[j]``."""

    classes: tuple[int, ...]
    matrix: np.ndarray

    @classmethod
    def from_labels(cls, y_true, y_pred, classes: Sequence[int] | None = None) -> "ConfusionCounts":
        y_true, y_pred = _pair(y_true, y_pred)
        if classes is None:
            classes = np.union1d(y_true, y_pred)
        classes = tuple(int(c) for c in classes)
        index = {c: i for i, c in enumerate(classes)}
        matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(y_true.tolist(), y_pred.tolist()):
            matrix[index[t], index[p]] += 1
        return cls(classes, matrix)

    @property
    def total(self) -> int:
        return int(self.matrix.sum())


def cohen_kappa(counts: ConfusionCounts) -> float:
    n = counts.total
    if n < 1:
        raise ValueError("kappa needs at least one scored observation")
    mat = counts.matrix
    # (p_o - p_e) / (1 - p_e) scaled by n**2 so that only one rounding happens
    agree = int(np.trace(mat)) * n
    chance = int((mat.sum(axis=1) * mat.sum(axis=0)).sum())
    if chance == n * n:
        return 0.0
    return (agree - chance) / (n * n - chance)


def kappa(y_true, y_pred, classes=None) -> float:
    return cohen_kappa(ConfusionCounts.from_labels(y_true, y_pred, classes))


def loss_function(measure_id: str, zero_division: float = 0.0) -> Callable:
    if measure_id == "accuracy":
        return accuracy
    if measure_id == "zero_one":
        return zero_one
    if measure_id == "f1":
        return lambda t, p: f1_binary(t, p, zero_division)
    if measure_id == "kappa":
        return kappa
    raise ValueError(f"{measure_id!r} cannot serve as a per-step loss")


def noise_variability(model, features, labels, loss: str | Callable = "zero_one",
                      noise_std: float = 1.0, n_samples: int = 15,
                      rng: np.random.Generator | None = None, zero_division: float = 0.0) -> float:
    """Mean loss increase when i.i.d. Gaussian noise perturbs every input entry.

    ``model`` is only queried through ``predict``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got shape {X.shape}")
    L = loss_function(loss, zero_division) if isinstance(loss, str) else loss
    rng = rng if rng is not None else np.random.default_rng()
    n, m = X.shape
    noise = rng.normal(0.0, noise_std, size=(n_samples, n, m))
    preds = model.predict((X[None] + noise).reshape(n_samples * n, m)).reshape(n_samples, n)
    base = L(y, model.predict(X))
    if L is zero_one:
        perturbed = (preds != y[None]).mean(axis=1)
    elif L is accuracy:
        perturbed = (preds == y[None]).mean(axis=1)
    else:
        perturbed = np.array([L(y, p) for p in preds])
    return float(math.fsum(perturbed - base) / n_samples)


# --- drift adaptability ------------------------------------------------------

def drift_performance_deterioration(loss_series: Sequence[float], t_d: int, W: int) -> float:
    if W < 1:
        raise ValueError("W must be >= 1")
    if t_d - W < 0:
        raise ValueError(f"need {W} steps before t_d={t_d}")
    if t_d + W > len(loss_series):
        raise ValueError(f"need {W} steps from t_d={t_d} on, series has {len(loss_series)}")
    after = math.fsum(loss_series[t_d + w] for w in range(W))
    before = math.fsum(loss_series[t_d - w] for w in range(1, W + 1))
    return (after - before) / W


def drift_restoration_time(loss_series: Sequence[float], t_d: int, W: int,
                           higher_better: bool = False, horizon: int | None = None) -> int | None:
    """Steps from ``t_d`` until the loss is back at its pre-drift window mean.

    The scan stops before ``horizon`` (e.g. the next known drift) or at the
    end of the series; ``None`` means the level was never restored.
    """
    if W < 1:
        raise ValueError("W must be >= 1")
    if t_d - W < 0:
        raise ValueError(f"need {W} steps before t_d={t_d}")
    end = len(loss_series) if horizon is None else min(horizon, len(loss_series))
    reference = math.fsum(loss_series[t_d - w] for w in range(1, W + 1)) / W
    slack = _RESTORE_RTOL * max(1.0, abs(reference))
    for t in range(t_d, end):
        value = loss_series[t]
        if (value >= reference - slack) if higher_better else (value <= reference + slack):
            return t - t_d
    return None


# --- drift detection ---------------------------------------------------------

@dataclass(frozen=True)
class DetectionRecord:
    known: tuple[int, ...]
    detected: tuple[int, ...]
    tolerance: int

    def __post_init__(self):
        object.__setattr__(self, "known", tuple(int(t) for t in self.known))
        object.__setattr__(self, "detected", tuple(int(t) for t in self.detected))
        for name in ("known", "detected"):
            seq = getattr(self, name)
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise ValueError(f"{name} drifts must be strictly increasing")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")

    def matched(self) -> list[bool]:
        """Per detection: does it fall in some known drift's window?

        Each detection counts at most once, for the earliest drift whose
        window ``[t_d, t_d + W]`` contains it.
        """
        W = self.tolerance
        return [any(t_d <= t <= t_d + W for t_d in self.known) for t in self.detected]


def detected_change_rate(rec: DetectionRecord) -> float:
    if not rec.known:
        raise ValueError("detected change rate needs at least one known drift")
    W = rec.tolerance
    hits = sum(1 for t_d in rec.known if any(t_d <= t <= t_d + W for t in rec.detected))
    return hits / len(rec.known)


def missed_detection_rate(rec: DetectionRecord) -> float:
    return 1.0 - detected_change_rate(rec)


def false_discovery_rate(rec: DetectionRecord) -> float | None:
    """``None`` when nothing was detected."""
    if not rec.detected:
        return None
    return 1.0 - sum(rec.matched()) / len(rec.detected)


def false_alarms(rec: DetectionRecord) -> list[int]:
    return [t for t, ok in zip(rec.detected, rec.matched()) if not ok]


def time_between_false_alarms(rec: DetectionRecord, stream_length: int) -> float:
    """Mean gap between consecutive false alarms, or ``stream_length`` when
    there are fewer than two."""
    alarms = false_alarms(rec)
    if len(alarms) < 2:
        return float(stream_length)
    return (alarms[-1] - alarms[0]) / (len(alarms) - 1)


def detection_delay(rec: DetectionRecord) -> tuple[list[int | None], float | None]:
    """Per known drift the delay of its first detection in window (``None``
    if missed), plus the mean over detected drifts."""
    W = rec.tolerance
    delays: list[int | None] = []
    for t_d in rec.known:
        hits = [t for t in rec.detected if t_d <= t <= t_d + W]
        delays.append(hits[0] - t_d if hits else None)
    found = [d for d in delays if d is not None]
    return delays, (sum(found) / len(found) if found else None)


def mean_time_ratio(mtfa: float, md: float | None, dcr: float) -> float | None:
    """``None`` when the mean delay is zero or undefined."""
    if md is None or md == 0:
        return None
    return mtfa / md * dcr


# --- feature selection -------------------------------------------------------

def feature_set_stability(history, k: int | None = None, m: int | None = None) -> float | None:
    """Stability of the selection vectors in ``history`` (one row per step).

    Returns ``None`` when every or no feature is selected, where the measure
    is undefined.
    """
    A = np.asarray(history, dtype=float)
    if A.ndim != 2 or A.shape[0] < 2:
        raise ValueError("need at least two selection vectors")
    w, width = A.shape
    m = width if m is None else m
    if width != m:
        raise ValueError(f"selection vectors have length {width}, expected {m}")
    sizes = A.sum(axis=1)
    if (sizes != sizes[0]).any():
        raise ValueError("all selection vectors must select the same number of features")
    k = int(sizes[0]) if k is None else k
    if sizes[0] != k:
        raise ValueError(f"selection vectors select {int(sizes[0])} features, expected {k}")
    if k == 0 or k == m:
        return None
    # with c_j = selection count of feature j the ratio reduces to integers:
    # m * sum_j c_j (w - c_j) / (w (w - 1) k (m - k))
    c = A.sum(axis=0).astype(np.int64)
    num = m * int((c * (w - c)).sum())
    den = w * (w - 1) * k * (m - k)
    return (den - num) / den


def reduction_rate(k: int, m: int) -> float:
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    return (m - k) / m


# --- aggregation -------------------------------------------------------------

def fading_update(S: float, N: float, value: float, alpha: float) -> tuple[float, float, float]:
    if not 0 < alpha <= 1:
        raise ValueError("fading factor must lie in (0, 1]")
    S = value + alpha * S
    N = 1.0 + alpha * N
    return S, N, S / N


def window_update(buffer: deque, value: float, w_agg: int) -> tuple[deque, float]:
    if w_agg < 1:
        raise ValueError("window size must be >= 1")
    if buffer.maxlen != w_agg:
        buffer = deque(buffer, maxlen=w_agg)
    buffer.append(value)
    return buffer, sum(buffer) / len(buffer)


@dataclass
class MeasureSeries:
    """Raw, sliding-window and faded values of one measure per tested step."""

    measure: str
    w_agg: int = 25
    alpha: float = 0.99
    steps: list[int] = field(default_factory=list)
    raw: list[float] = field(default_factory=list)
    windowed: list[float] = field(default_factory=list)
    faded: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._buffer: deque = deque(maxlen=self.w_agg)
        self._S = 0.0
        self._N = 0.0

    @property
    def direction(self) -> str:
        return direction(self.measure)

    def append(self, step: int, value: float) -> None:
        self._buffer, mean = window_update(self._buffer, value, self.w_agg)
        self._S, self._N, faded = fading_update(self._S, self._N, value, self.alpha)
        self.steps.append(step)
        self.raw.append(value)
        self.windowed.append(mean)
        self.faded.append(faded)

    def __len__(self):
        return len(self.raw)

    def mean(self) -> float | None:
        return math.fsum(self.raw) / len(self.raw) if self.raw else None
