"""Active concept drift detectors fed with a per-observation error signal."""

from __future__ import annotations

import copy
import math


class DriftDetector:
    """Base contract: :meth:`update` returns True on an alarm.

    ``detections`` lists the indices at which alarms were raised. Callers
    may pass the index explicitly (pipelines pass the observation index);
    otherwise the count of values seen so far is used.
    """

    def __init__(self):
        self.detections: list[int] = []
        self.n_seen = 0

    def update(self, value: float, index: int | None = None) -> bool:
        index = self.n_seen if index is None else index
        self.n_seen += 1
        alarm = self._update(float(value))
        if alarm:
            if self.detections and index <= self.detections[-1]:
                raise ValueError("detection indices must be strictly increasing")
            self.detections.append(index)
        return alarm

    def _update(self, value: float) -> bool:
        raise NotImplementedError

    def _reset_statistics(self) -> None:
        raise NotImplementedError

    def reset(self) -> "DriftDetector":
        """Forget statistics and the alarm log; hyperparameters stay."""
        self._reset_statistics()
        self.detections = []
        self.n_seen = 0
        return self

    def clone(self) -> "DriftDetector":
        return copy.deepcopy(self)


class PageHinkley(DriftDetector):
    """Page-Hinkley test for an increase in the mean of the input."""

    def __init__(self, delta: float = 0.005, threshold: float = 50.0, min_instances: int = 30):
        super().__init__()
        self.delta = delta
        self.threshold = threshold
        self.min_instances = min_instances
        self._reset_statistics()

    def _reset_statistics(self):
        self.count = 0
        self.mean = 0.0
        self.cumsum = 0.0
        self.minimum = 0.0

    def _update(self, value):
        if not math.isfinite(value):
            raise ValueError("Page-Hinkley input must be finite")
        self.count += 1
        self.mean += (value - self.mean) / self.count
        self.cumsum += value - self.mean - self.delta
        self.minimum = min(self.minimum, self.cumsum)
        if self.count >= self.min_instances and self.cumsum - self.minimum > self.threshold:
            self._reset_statistics()
            return True
        return False


class Adwin(DriftDetector):
    """ADWIN over an exponential histogram of at most ``max_buckets`` per row.

    Row ``i`` holds buckets of ``2**i`` values, oldest first. The cut test
    runs once per update and drops the oldest bucket for as long as some
    split of the window shows a significant difference of means.
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = 5):
        super().__init__()
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.max_buckets = max_buckets
        self._reset_statistics()

    def _reset_statistics(self):
        # rows[i] is a list of bucket sums, each bucket holding 2**i values
        self.rows: list[list[float]] = []
        self.width = 0
        self.total = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.width if self.width else 0.0

    def buckets(self):
        """(size, sum) pairs from the oldest bucket to the newest."""
        for i in range(len(self.rows) - 1, -1, -1):
            size = 1 << i
            for s in self.rows[i]:
                yield size, s

    def _update(self, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"ADWIN input must lie in [0, 1], got {value}")
        self._insert(value)
        alarm = False
        while self._cut_found():
            self._drop_oldest()
            alarm = True
        return alarm

    def _insert(self, value):
        if not self.rows:
            self.rows.append([])
        self.rows[0].append(value)
        self.width += 1
        self.total += value
        i = 0
        while i < len(self.rows) and len(self.rows[i]) > self.max_buckets:
            merged = self.rows[i][0] + self.rows[i][1]
            del self.rows[i][:2]
            if i + 1 == len(self.rows):
                self.rows.append([])
            self.rows[i + 1].append(merged)
            i += 1

    def _drop_oldest(self):
        top = len(self.rows) - 1
        s = self.rows[top].pop(0)
        self.width -= 1 << top
        self.total -= s
        while self.rows and not self.rows[-1]:
            self.rows.pop()

    def _cut_found(self) -> bool:
        n = self.width
        if n < 2:
            return False
        log_term = math.log(4.0 * n / self.delta)
        n0 = 0
        s0 = 0.0
        for size, s in self.buckets():
            n0 += size
            s0 += s
            n1 = n - n0
            if n1 == 0:
                break
            mean_diff = abs(s0 / n0 - (self.total - s0) / n1)
            m_h = 1.0 / (1.0 / n0 + 1.0 / n1)
            if mean_diff > math.sqrt(log_term / (2.0 * m_h)):
                return True
        return False


DETECTORS = {"page_hinkley": PageHinkley, "adwin": Adwin}


def make_detector(kind: str, **params) -> DriftDetector:
    try:
        return DETECTORS[kind](**params)
    except KeyError:
        raise ValueError(f"unknown detector kind {kind!r}") from None
