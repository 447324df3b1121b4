"""Streaming observations: batches, sources, synthetic drift generators and
online standardization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

ABRUPT = "abrupt"
GRADUAL = "gradual"


@dataclass(frozen=True)
class Batch:
    """Observations of one time step.

    ``offset`` is the global index of the first row, so row ``i`` is
    observation ``offset + i`` of the stream.
    """

    step: int
    features: np.ndarray
    labels: np.ndarray
    offset: int = 0

    def __post_init__(self):
        if self.step < 0:
            raise ValueError("step must be non-negative")
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if self.labels.ndim != 1 or len(self.labels) != self.features.shape[0]:
            raise ValueError("labels length must equal the feature row count")
        if len(self.labels) < 1:
            raise ValueError("a batch holds at least one observation")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.size)


@dataclass(frozen=True)
class DriftSchedule:
    """Ground-truth drift positions in observation indices."""

    positions: tuple[int, ...] = ()
    kinds: tuple[str, ...] = ()
    magnitudes: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "magnitudes", tuple(float(v) for v in self.magnitudes))
        n = len(self.positions)
        if len(self.kinds) != n or len(self.magnitudes) != n:
            raise ValueError("positions, kinds and magnitudes must have equal length")
        if any(p < 1 for p in self.positions):
            raise ValueError("drift positions must be >= 1")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("drift positions must be strictly increasing")
        if any(k not in (ABRUPT, GRADUAL) for k in self.kinds):
            raise ValueError(f"drift kind must be {ABRUPT!r} or {GRADUAL!r}")
        if any(not v > 0 for v in self.magnitudes):
            raise ValueError("drift magnitudes must be positive")

    @classmethod
    def uniform(cls, positions: Sequence[int], kind: str, magnitude: float) -> "DriftSchedule":
        return cls(tuple(positions), (kind,) * len(positions), (magnitude,) * len(positions))

    def __len__(self):
        return len(self.positions)


class StreamSource:
    """Pull-based source over an in-memory observation matrix.

    Every call to :meth:`next_batch` yields the next step index; ``None``
    marks the end of the stream. Subclasses only have to fill ``_X`` and
    ``_y`` so that replay after :meth:`reset` is exact.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, classes: Sequence[int],
                 schedule: DriftSchedule | None = None):
        self._X = np.ascontiguousarray(X, dtype=float)
        self._y = np.ascontiguousarray(y, dtype=np.int64)
        self.classes = tuple(int(c) for c in classes)
        self.schedule = schedule
        self.n_features = self._X.shape[1]
        self.length = len(self._y)
        self._pos = 0
        self.cursor = 0

    def reset(self) -> None:
        self._pos = 0
        self.cursor = 0

    def next_batch(self, batch_size: int) -> Batch | None:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self._pos >= self.length:
            return None
        stop = min(self._pos + batch_size, self.length)
        batch = Batch(self.cursor, self._X[self._pos:stop].copy(),
                      self._y[self._pos:stop].copy(), offset=self._pos)
        self._pos = stop
        self.cursor += 1
        return batch

    def batches(self, batch_size: int) -> Iterator[Batch]:
        while (batch := self.next_batch(batch_size)) is not None:
            yield batch

    @property
    def remaining(self) -> int:
        return self.length - self._pos


class CsvError(ValueError):
    pass


class CsvSource(StreamSource):
    """Rows of a numeric CSV file in file order.

    Label values are mapped to class ids ``0..C-1`` by their sorted order;
    the original values stay available as ``label_values``.
    """

    def __init__(self, path, target_col: int = -1, has_header: bool = False):
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"no such CSV file: {path}")
        rows = []
        width = None
        with path.open(encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        start = 1 if has_header else 0
        for lineno, line in enumerate(lines[start:], start=start + 1):
            if not line.strip():
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise CsvError(f"row {lineno}: expected {width} columns, got {len(cells)}")
            values = []
            for col, cell in enumerate(cells, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvError(f"row {lineno}, column {col}: cannot parse {cell.strip()!r} "
                                   "as a number") from None
            rows.append(values)
        if not rows:
            raise CsvError(f"{path} contains no data rows")
        if not -width <= target_col < width:
            raise CsvError(f"target column {target_col} out of range for {width} columns")
        data = np.asarray(rows, dtype=float)
        target = target_col % width
        raw_labels = data[:, target]
        self.label_values = tuple(np.unique(raw_labels).tolist())
        y = np.searchsorted(np.asarray(self.label_values), raw_labels)
        X = np.delete(data, target, axis=1)
        self.path = path
        super().__init__(X, y, range(len(self.label_values)))


def csv_open(path, target_col: int = -1, has_header: bool = False) -> CsvSource:
    return CsvSource(path, target_col=target_col, has_header=has_header)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


class AbruptSource(StreamSource):
    """Binary Gaussian classes whose separating direction jumps at each drift.

    Class means sit at ``±magnitude`` along a unit direction, so they are
    ``2·magnitude`` apart. At every drift position a new direction is drawn
    orthogonal to the current one (sign flip when there is one feature) and
    the drift's magnitude takes over.
    """

    def __init__(self, seed: int, n_features: int, schedule: DriftSchedule | None = None,
                 n_total: int = 10000, magnitude: float = 3.0):
        schedule = schedule if schedule is not None else DriftSchedule()
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        if magnitude <= 0:
            raise ValueError("magnitude must be positive")
        if any(k != ABRUPT for k in schedule.kinds):
            raise ValueError("abrupt generator only supports abrupt drifts")
        if any(p >= n_total for p in schedule.positions):
            raise ValueError(f"drift position must be < n_total={n_total}")
        rng = np.random.default_rng(seed)
        direction = _unit(rng.standard_normal(n_features))
        y = rng.integers(0, 2, size=n_total)
        noise = rng.standard_normal((n_total, n_features))
        signs = (2 * y - 1).astype(float)
        X = np.empty((n_total, n_features))
        bounds = [0, *schedule.positions, n_total]
        mags = [magnitude, *schedule.magnitudes]
        for i, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
            if i > 0:
                direction = self._redraw(rng, direction)
            X[lo:hi] = noise[lo:hi] + np.outer(signs[lo:hi] * mags[i], direction)
        self.seed = seed
        self.magnitude = magnitude
        super().__init__(X, y, (0, 1), schedule)

    @staticmethod
    def _redraw(rng, direction):
        if len(direction) == 1:
            return -direction
        while True:
            v = rng.standard_normal(len(direction))
            v -= (v @ direction) * direction
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                return v / norm


def synth_abrupt(seed: int, n_features: int, schedule: DriftSchedule | None = None,
                 n_total: int = 10000, magnitude: float = 3.0) -> AbruptSource:
    return AbruptSource(seed, n_features, schedule, n_total, magnitude)


class HyperplaneSource(StreamSource):
    """Labels given by the side of a rotating hyperplane through the origin.

    Inside the interval of each gradual drift the normal vector rotates by
    ``rotation_rate`` radians per observation until the drift's magnitude
    (the total angle, in radians) is used up.
    """

    def __init__(self, seed: int, n_features: int, rotation_rate: float = 0.0,
                 n_total: int = 10000, schedule: DriftSchedule | None = None):
        schedule = schedule if schedule is not None else DriftSchedule()
        if n_features < 2:
            raise ValueError("hyperplane generator needs at least 2 features")
        if rotation_rate < 0:
            raise ValueError("rotation_rate must be >= 0")
        if any(k != GRADUAL for k in schedule.kinds):
            raise ValueError("hyperplane generator only supports gradual drifts")
        if any(p >= n_total for p in schedule.positions):
            raise ValueError(f"drift position must be < n_total={n_total}")
        rng = np.random.default_rng(seed)
        normal = _unit(rng.standard_normal(n_features))
        ortho = AbruptSource._redraw(rng, normal)
        X = rng.standard_normal((n_total, n_features))
        self.angles = self.angle_trace(n_total, rotation_rate, schedule)
        normals = np.outer(np.cos(self.angles), normal) + np.outer(np.sin(self.angles), ortho)
        y = (np.einsum("ij,ij->i", X, normals) > 0).astype(np.int64)
        self.seed = seed
        self.rotation_rate = rotation_rate
        self.normal0 = normal
        self.ortho = ortho
        super().__init__(X, y, (0, 1), schedule)

    @staticmethod
    def angle_trace(n_total: int, rotation_rate: float, schedule: DriftSchedule) -> np.ndarray:
        t = np.arange(n_total, dtype=float)
        angle = np.zeros(n_total)
        if rotation_rate == 0:
            return angle
        for pos, total in zip(schedule.positions, schedule.magnitudes):
            angle += np.clip((t - pos + 1) * rotation_rate, 0.0, total)
        return angle

    def normal_at(self, t: int) -> np.ndarray:
        a = self.angles[t]
        return math.cos(a) * self.normal0 + math.sin(a) * self.ortho


def synth_hyperplane(seed: int, n_features: int, rotation_rate: float = 0.0,
                     n_total: int = 10000, schedule: DriftSchedule | None = None) -> HyperplaneSource:
    return HyperplaneSource(seed, n_features, rotation_rate, n_total, schedule)


@dataclass
class StandardizerState:
    count: int = 0
    mean: np.ndarray | None = None
    m2: np.ndarray | None = None

    @property
    def variance(self) -> np.ndarray:
        if self.count == 0:
            raise ValueError("variance undefined before any observation")
        return self.m2 / self.count


def standardize(state: StandardizerState, batch: Batch) -> tuple[StandardizerState, Batch]:
    """Absorb ``batch`` into the running statistics, then scale it with them."""
    X = batch.features
    if state.mean is None:
        state = StandardizerState(0, np.zeros(X.shape[1]), np.zeros(X.shape[1]))
    elif len(state.mean) != X.shape[1]:
        raise ValueError(f"width mismatch: state has {len(state.mean)}, batch has {X.shape[1]}")
    count, mean, m2 = state.count, state.mean.copy(), state.m2.copy()
    # Chan et al. parallel merge of the batch into the running moments
    n_b = X.shape[0]
    mean_b = X.mean(axis=0)
    m2_b = ((X - mean_b) ** 2).sum(axis=0)
    total = count + n_b
    delta = mean_b - mean
    mean = mean + delta * (n_b / total)
    m2 = m2 + m2_b + delta ** 2 * (count * n_b / total)
    new_state = StandardizerState(total, mean, m2)
    scale = np.maximum(np.sqrt(m2 / total), 1e-12)
    out = Batch(batch.step, (X - mean) / scale, batch.labels, batch.offset)
    return new_state, out


@dataclass
class Standardizer:
    """Stateful wrapper around :func:`standardize` owned by one pipeline."""

    state: StandardizerState = field(default_factory=StandardizerState)

    def __call__(self, batch: Batch) -> Batch:
        self.state, out = standardize(self.state, batch)
        return out
