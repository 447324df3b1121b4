"""Prequential, periodic holdout and distributed k-fold evaluation."""

from __future__ import annotations

import bisect
import math
import time
import zlib
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import measures as M
from .detectors import DriftDetector
from .learners import OnlinePredictor
from .selectors import OFS, apply_selection
from .stream import Batch, Standardizer, StreamSource

SCHEMES = ("cross", "split", "bootstrap")
STRATEGIES = ("prequential", "holdout", "kfold")


def derive_seed(seed: int, name: str) -> int:
    """Independent, reproducible seed for the named random substream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(zlib.crc32(name.encode()),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def substream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, name))


@dataclass
class PipelineConfig:
    batch_size: int = 1
    n_pretrain: int = 0
    test_interval: int = 100
    holdout_size: int = 100
    k: int = 10
    scheme: str = "cross"
    w_agg: int = 25
    fading_factor: float = 0.99
    measures: tuple[str, ...] = ("accuracy",)
    reference_measure: str = "zero_one"
    noise_std: float = 1.0
    noise_samples: int = 15
    zero_division: float = 0.0
    known_drifts: tuple[int, ...] = ()
    tolerance: int = 500
    drift_window: int = 10
    fss_window: int = 10
    reset_after_drift: bool = False
    standardize: bool = False
    seed: int = 0

    def __post_init__(self):
        self.measures = tuple(self.measures)
        self.known_drifts = tuple(int(t) for t in self.known_drifts)
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.n_pretrain < 0:
            raise ValueError("n_pretrain must be >= 0")
        if self.test_interval < 1 or self.holdout_size < 1:
            raise ValueError("test_interval and holdout_size must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown k-fold scheme {self.scheme!r}")
        if self.w_agg < 1:
            raise ValueError("w_agg must be >= 1")
        if not 0 < self.fading_factor <= 1:
            raise ValueError("fading_factor must lie in (0, 1]")
        unknown = [m for m in self.measures if m not in M.MEASURES]
        if unknown:
            raise ValueError(f"unknown measure ids {unknown}")
        if self.reference_measure not in M.LOSS_MEASURES:
            raise ValueError(f"reference measure must be one of {M.LOSS_MEASURES}")
        if self.fss_window < 2:
            raise ValueError("fss_window must be >= 2")
        needs_drifts = self.wants("drift") + self.wants("detection")
        if needs_drifts and not self.known_drifts:
            raise ValueError(f"measures {needs_drifts} require known drift positions")

    def wants(self, scope: str) -> list[str]:
        return [m for m in self.measures if M.MEASURES[m].scope == scope]


@dataclass
class MeasurementLog:
    """Everything one model (or fold) produced during a run."""

    name: str
    series: dict[str, M.MeasureSeries] = field(default_factory=dict)
    steps: list[int] = field(default_factory=list)
    offsets: list[int] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)
    detections: list[int] = field(default_factory=list)
    resets: list[int] = field(default_factory=list)
    selections: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    test_seconds: list[float] = field(default_factory=list)
    train_seconds: list[float] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def step_position(self, observation: int) -> int | None:
        """Index of the first tested step whose batch ends after ``observation``."""
        ends = [o + s for o, s in zip(self.offsets, self.sizes)]
        i = bisect.bisect_right(ends, observation)
        return i if i < len(ends) else None


class Lane:
    """One predictor with its own detector, selector, aggregators and noise RNG."""

    def __init__(self, name: str, model: OnlinePredictor, config: PipelineConfig,
                 detector: DriftDetector | None = None, selector: OFS | None = None,
                 rng: np.random.Generator | None = None):
        self.model = model
        self.config = config
        self.detector = detector
        self.selector = selector
        self.rng = rng if rng is not None else substream(config.seed, f"noise/{name}")
        self.log = MeasurementLog(name)
        step_ids = config.wants("step")
        if config.wants("drift") and config.reference_measure not in step_ids:
            step_ids.append(config.reference_measure)
        for mid in step_ids:
            self.log.series[mid] = M.MeasureSeries(mid, config.w_agg, config.fading_factor)
        if selector is not None and "fss" in config.measures:
            self.log.series["fss"] = M.MeasureSeries("fss", config.w_agg, config.fading_factor)
        self._history: deque = deque(maxlen=config.fss_window)

    def _mask(self, batch: Batch) -> Batch:
        if self.selector is None:
            return batch
        return apply_selection(batch, self.selector.selection())

    def test(self, batch: Batch, scored: Batch | None = None) -> np.ndarray:
        """Score the model on ``scored`` (defaults to ``batch``) and return the
        per-observation 0/1 errors. ``batch`` fixes the step bookkeeping."""
        scored = batch if scored is None else scored
        masked = self._mask(scored)
        t0 = time.perf_counter()
        pred = self.model.predict(masked.features)
        self.log.test_seconds.append(time.perf_counter() - t0)
        y = masked.labels
        cfg = self.config
        for mid, series in self.log.series.items():
            if mid == "fss":
                continue
            if mid == "noise_variability":
                value = M.noise_variability(self.model, masked.features, y, cfg.reference_measure,
                                            cfg.noise_std, cfg.noise_samples, self.rng,
                                            cfg.zero_division)
            elif mid == "kappa":
                value = M.kappa(y, pred, self.model.classes)
            else:
                value = M.loss_function(mid, cfg.zero_division)(y, pred)
            series.append(batch.step, value)
        self.log.steps.append(batch.step)
        self.log.offsets.append(batch.offset)
        self.log.sizes.append(batch.size)
        return (pred != y).astype(float)

    def detect(self, batch: Batch, errors: np.ndarray) -> None:
        if self.detector is None:
            return
        for i, err in enumerate(errors):
            if self.detector.update(err, index=batch.offset + i):
                self.log.detections.append(batch.offset + i)
                if self.config.reset_after_drift:
                    self.model.reset()
                    if self.selector is not None:
                        self.selector.reset()
                    self.log.resets.append(batch.offset + i)

    def train(self, batch: Batch, weight=None) -> None:
        if self.selector is not None:
            bits = self.selector.update_select(batch.features, batch.labels)
            self._record_selection(batch.step, bits)
        masked = self._mask(batch)
        t0 = time.perf_counter()
        self.model.partial_fit(masked.features, masked.labels, weight)
        self.log.train_seconds.append(time.perf_counter() - t0)

    def _record_selection(self, step: int, bits: np.ndarray) -> None:
        self.log.selections.append((step, tuple(int(b) for b in bits)))
        self._history.append(bits)
        series = self.log.series.get("fss")
        if series is not None and len(self._history) == self._history.maxlen:
            value = M.feature_set_stability(np.array(self._history))
            if value is not None:
                series.append(step, value)


def _read_pretrain(source: StreamSource, config: PipelineConfig,
                   prep: Standardizer | None) -> list[Batch]:
    out = []
    left = config.n_pretrain
    while left > 0:
        batch = source.next_batch(min(config.batch_size, left))
        if batch is None:
            break
        left -= batch.size
        out.append(prep(batch) if prep else batch)
    return out


def _check_stream(source: StreamSource, config: PipelineConfig) -> None:
    if config.n_pretrain >= source.length:
        raise ValueError(f"n_pretrain={config.n_pretrain} leaves no observations of the "
                         f"{source.length}-observation stream for evaluation")


def _lanes(config, source, predictors, detector, selector) -> dict[str, Lane]:
    lanes = {}
    for name, model in predictors.items():
        lanes[name] = Lane(name, model, config,
                           detector.clone() if detector is not None else None,
                           selector.clone() if selector is not None else None)
    return lanes


def run_prequential(config: PipelineConfig, source: StreamSource,
                    predictors: dict[str, OnlinePredictor], detector: DriftDetector | None = None,
                    selector: OFS | None = None) -> dict[str, MeasurementLog]:
    """Test-then-train over the stream; every model sees the same batches.

    Per step: test, feed errors to the detector, update the selector on raw
    features, then train on the masked batch.
    """
    _check_stream(source, config)
    prep = Standardizer() if config.standardize else None
    lanes = _lanes(config, source, predictors, detector, selector)
    for batch in _read_pretrain(source, config, prep):
        for lane in lanes.values():
            lane.train(batch)
    for batch in source.batches(config.batch_size):
        batch = prep(batch) if prep else batch
        for lane in lanes.values():
            errors = lane.test(batch)
            lane.detect(batch, errors)
            lane.train(batch)
    logs = {name: lane.log for name, lane in lanes.items()}
    for log in logs.values():
        log.summary = summarize(log, config, source.length, source.n_features, selector)
    return logs


def run_holdout(config: PipelineConfig, source: StreamSource,
                predictors: dict[str, OnlinePredictor], detector: DriftDetector | None = None,
                selector: OFS | None = None) -> dict[str, MeasurementLog]:
    """Periodic holdout evaluation on a withheld, FIFO-refreshed test set.

    After pretraining the first ``holdout_size`` observations fill the
    holdout set. Every ``test_interval`` steps the oldest ``ceil(h/10)``
    members are replaced by observations withheld since the previous test
    and all models are scored on the holdout set. Holdout members are never
    trained on.
    """
    if detector is not None:
        raise ValueError("drift detectors are not supported in holdout evaluation")
    _check_stream(source, config)
    h = config.holdout_size
    if source.length - config.n_pretrain < h:
        raise ValueError(f"stream too short to fill a holdout set of {h}")
    prep = Standardizer() if config.standardize else None
    lanes = _lanes(config, source, predictors, None, selector)
    for batch in _read_pretrain(source, config, prep):
        for lane in lanes.values():
            lane.train(batch)

    hold_X: deque = deque(maxlen=h)
    hold_y: deque = deque(maxlen=h)
    refresh = math.ceil(h / 10)
    quota = h  # observations still to withhold before the next test
    pending: list[tuple[np.ndarray, int]] = []
    since_test = 0
    filled = False
    for batch in source.batches(config.batch_size):
        batch = prep(batch) if prep else batch
        take = min(quota, batch.size)
        pending.extend(zip(batch.features[:take], batch.labels[:take].tolist()))
        quota -= take
        if not filled and quota == 0:
            filled = True
            since_test = config.test_interval - 1
        if filled:
            since_test += 1
            if since_test == config.test_interval:
                since_test = 0
                for x, y in pending:
                    hold_X.append(x)
                    hold_y.append(y)
                pending = []
                quota = refresh
                holdout = Batch(batch.step, np.array(hold_X), np.array(hold_y, dtype=np.int64),
                                batch.offset)
                for lane in lanes.values():
                    lane.test(batch, scored=holdout)
        if take < batch.size:
            rest = Batch(batch.step, batch.features[take:], batch.labels[take:],
                         batch.offset + take)
            for lane in lanes.values():
                lane.train(rest)
    logs = {name: lane.log for name, lane in lanes.items()}
    for log in logs.values():
        log.summary = summarize(log, config, source.length, source.n_features, selector)
    return logs


def kfold_assign(scheme: str, k: int, rng: np.random.Generator) -> np.ndarray:
    """Training weight per model instance for one step; weight 0 means test."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if scheme == "cross":
        w = np.ones(k, dtype=np.int64)
        w[rng.integers(k)] = 0
    elif scheme == "split":
        w = np.zeros(k, dtype=np.int64)
        w[rng.integers(k)] = 1
    elif scheme == "bootstrap":
        w = rng.poisson(1.0, size=k).astype(np.int64)
    else:
        raise ValueError(f"unknown k-fold scheme {scheme!r}")
    return w


def _run_fold(lane: Lane, batches: Sequence[Batch], n_pretrain_batches: int,
              weights: np.ndarray) -> MeasurementLog:
    for batch in batches[:n_pretrain_batches]:
        lane.train(batch)
    for batch, w in zip(batches[n_pretrain_batches:], weights):
        if w == 0:
            errors = lane.test(batch)
            lane.detect(batch, errors)
        else:
            lane.train(batch, int(w))
    return lane.log


def run_kfold(config: PipelineConfig, source: StreamSource, prototype: OnlinePredictor,
              detector: DriftDetector | None = None, selector: OFS | None = None,
              name: str = "model", workers: int = 1) -> tuple[dict[str, MeasurementLog], dict]:
    """Distributed k-fold evaluation of ``k`` clones of ``prototype``.

    The per-step role assignment is drawn up front from the ``kfold``
    substream, so fold results do not depend on ``workers``. Returns the
    per-fold logs and a mean / sample-std summary across folds.
    """
    _check_stream(source, config)
    prep = Standardizer() if config.standardize else None
    pre = _read_pretrain(source, config, prep)
    batches = pre + [prep(b) if prep else b for b in source.batches(config.batch_size)]
    rng = substream(config.seed, "kfold")
    n_eval = len(batches) - len(pre)
    weights = np.array([kfold_assign(config.scheme, config.k, rng) for _ in range(n_eval)])
    weights = weights.reshape(n_eval, config.k)
    lanes = [Lane(f"{name}/fold{f}", prototype.clone(), config,
                  detector.clone() if detector is not None else None,
                  selector.clone() if selector is not None else None,
                  substream(config.seed, f"noise/{name}/fold{f}"))
             for f in range(config.k)]
    args = [(lane, batches, len(pre), weights[:, f]) for f, lane in enumerate(lanes)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            fold_logs = list(pool.map(_run_fold, *zip(*args)))
    else:
        fold_logs = [_run_fold(*a) for a in args]
    logs = {}
    for log in fold_logs:
        log.summary = summarize(log, config, source.length, source.n_features, selector)
        logs[log.name] = log
    return logs, fold_statistics(list(logs.values()))


def fold_statistics(logs: Sequence[MeasurementLog]) -> dict:
    """Mean and sample standard deviation of every numeric summary entry."""
    keys = sorted({k for log in logs for k, v in log.summary.items()
                   if isinstance(v, (int, float)) and not isinstance(v, bool)})
    out = {}
    for key in keys:
        values = [log.summary.get(key) for log in logs]
        values = [float(v) for v in values if isinstance(v, (int, float))]
        if not values:
            continue
        out[key] = {
            "mean": math.fsum(values) / len(values),
            "std": float(np.std(values, ddof=1)) if len(values) > 1 else None,
            "n": len(values),
        }
    return out


def _mean_defined(values):
    found = [v for v in values if v is not None]
    return math.fsum(found) / len(found) if found else None


def summarize(log: MeasurementLog, config: PipelineConfig, stream_length: int,
              n_features: int, selector: OFS | None = None) -> dict:
    """Scalar summary recomputable from the raw per-step log."""
    out: dict = {"n_tested_steps": len(log.steps),
                 "n_tested_observations": int(sum(log.sizes))}
    for mid, series in log.series.items():
        out[f"{mid}_mean"] = series.mean()
        out[f"{mid}_final_windowed"] = series.windowed[-1] if len(series) else None
        out[f"{mid}_final_faded"] = series.faded[-1] if len(series) else None

    known = list(config.known_drifts)
    if config.wants("drift") and known:
        ref = log.series[config.reference_measure]
        higher = M.direction(config.reference_measure) == M.HIGHER_BETTER
        positions = [log.step_position(t) for t in known]
        dpd, drt = [], []
        W = config.drift_window
        for i, pos in enumerate(positions):
            horizon = next((p for p in positions[i + 1:] if p is not None), None)
            if pos is None or pos - W < 0:
                dpd.append(None)
                drt.append(None)
                continue
            dpd.append(M.drift_performance_deterioration(ref.raw, pos, W)
                       if pos + W <= len(ref.raw) else None)
            drt.append(M.drift_restoration_time(ref.raw, pos, W, higher, horizon))
        if "dpd" in config.measures:
            out["dpd_per_drift"] = dpd
            out["dpd_mean"] = _mean_defined(dpd)
        if "drt" in config.measures:
            out["drt_per_drift"] = drt
            out["drt_mean"] = _mean_defined(drt)
            out["drt_not_restored"] = sum(1 for p, d in zip(positions, drt)
                                          if p is not None and p - W >= 0 and d is None)

    wanted = set(config.wants("detection"))
    if wanted and known:
        rec = M.DetectionRecord(tuple(known), tuple(log.detections), config.tolerance)
        dcr = M.detected_change_rate(rec)
        mtfa = M.time_between_false_alarms(rec, stream_length)
        delays, md = M.detection_delay(rec)
        values = {"dcr": dcr, "fdr": M.false_discovery_rate(rec), "mtfa": mtfa,
                  "delay": md, "mtr": M.mean_time_ratio(mtfa, md, dcr)}
        for mid in sorted(wanted):
            out[mid] = values[mid]
        if "delay" in wanted:
            out["delay_per_drift"] = delays
        out["n_detections"] = len(log.detections)
        out["n_false_alarms"] = len(M.false_alarms(rec))

    if selector is not None:
        if "fss" in config.measures:
            out["fss_mean"] = log.series["fss"].mean() if "fss" in log.series else None
        if "reduction_rate" in config.measures:
            out["reduction_rate"] = M.reduction_rate(selector.k, n_features)
    return out
