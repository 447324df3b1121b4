"""Experiment orchestration and persistent results."""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import measures as M
from . import report
from .config import ConfigError, ExperimentConfig
from .detectors import make_detector
from .learners import make_learner
from .pipelines import (MeasurementLog, PipelineConfig, derive_seed, run_holdout, run_kfold,
                        run_prequential)
from .selectors import make_selector
from .stream import (ABRUPT, GRADUAL, DriftSchedule, StreamSource, csv_open, synth_abrupt,
                     synth_hyperplane)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SERIES_HEADER = ["step", "model", "measure", "raw", "windowed", "faded"]


@dataclass
class ResultBundle:
    config: dict
    logs: dict[str, MeasurementLog]
    summary: dict
    known_drifts: list[int]
    stream_length: int
    fold_summary: dict | None = None
    wall_clock: dict = field(default_factory=dict)
    out_dir: Path | None = None

    def to_json(self) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "config": self.config,
            "known_drifts": self.known_drifts,
            "stream_length": self.stream_length,
            "summary": self.summary,
            "models": {name: _log_json(lg) for name, lg in self.logs.items()},
            "wall_clock": self.wall_clock,
        }
        if self.fold_summary is not None:
            doc["fold_summary"] = self.fold_summary
        return doc


def _log_json(lg: MeasurementLog) -> dict:
    return {
        "steps": lg.steps,
        "offsets": lg.offsets,
        "sizes": lg.sizes,
        "series": {mid: {"steps": s.steps, "raw": s.raw, "windowed": s.windowed,
                         "faded": s.faded, "direction": s.direction}
                   for mid, s in lg.series.items()},
        "detections": lg.detections,
        "resets": lg.resets,
        "selections": [{"step": step, "selected": [j for j, b in enumerate(bits) if b]}
                       for step, bits in lg.selections],
    }


def build_source(cfg: ExperimentConfig) -> StreamSource:
    spec = cfg.source
    if spec.type == "csv":
        return csv_open(spec.path, spec.target_col, spec.has_header)
    kind = ABRUPT if spec.type == "abrupt" else GRADUAL
    schedule = DriftSchedule(tuple(d.position for d in spec.drifts), (kind,) * len(spec.drifts),
                             tuple(d.magnitude for d in spec.drifts))
    seed = derive_seed(cfg.seed, "generator")
    try:
        if spec.type == "abrupt":
            return synth_abrupt(seed, spec.n_features, schedule, spec.n_total, spec.magnitude)
        return synth_hyperplane(seed, spec.n_features, spec.rotation_rate, spec.n_total, schedule)
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from None


def pipeline_config(cfg: ExperimentConfig) -> PipelineConfig:
    p, e = cfg.pipeline, cfg.evaluation
    return PipelineConfig(
        batch_size=p.batch_size, n_pretrain=p.n_pretrain, test_interval=p.test_interval,
        holdout_size=p.holdout_size, k=p.k, scheme=p.scheme, w_agg=p.w_agg,
        fading_factor=p.fading_factor, measures=tuple(cfg.measures),
        reference_measure=e.reference_measure, noise_std=e.noise_std,
        noise_samples=e.noise_samples, zero_division=e.zero_division,
        known_drifts=tuple(cfg.known_drift_positions()), tolerance=e.tolerance,
        drift_window=e.drift_window, fss_window=e.fss_window,
        reset_after_drift=p.reset_after_drift, standardize=p.standardize, seed=cfg.seed)


def _components(cfg: ExperimentConfig, source: StreamSource):
    try:
        models = {name: make_learner(spec.kind, source.n_features, source.classes, **spec.params)
                  for name, spec in zip(cfg.model_names(), cfg.models)}
        detector = (make_detector(cfg.detector.kind, **cfg.detector.params)
                    if cfg.detector else None)
        selector = None
        if cfg.selector:
            selector = make_selector(cfg.selector.kind, source.n_features, k=cfg.selector.k,
                                     learning_rate=cfg.selector.learning_rate,
                                     regularization=cfg.selector.regularization)
    except TypeError as exc:
        raise ConfigError(f"invalid component parameter: {exc}") from None
    return models, detector, selector


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int = 1,
                   write: bool = True) -> ResultBundle:
    """Run the configured pipeline and, if ``write``, persist all outputs."""
    started = dt.datetime.now(dt.timezone.utc)
    t0 = time.perf_counter()
    source = build_source(cfg)
    models, detector, selector = _components(cfg, source)
    pcfg = pipeline_config(cfg)
    strategy = cfg.pipeline.strategy
    fold_summary = None
    if strategy == "prequential":
        logs = run_prequential(pcfg, source, models, detector, selector)
    elif strategy == "holdout":
        logs = run_holdout(pcfg, source, models, detector, selector)
    else:
        (name, model), = models.items()
        logs, fold_summary = run_kfold(pcfg, source, model, detector, selector, name=name,
                                       workers=workers)
    out = Path(out_dir if out_dir is not None else cfg.output)
    timers = {name: {"train_seconds": lg.train_seconds, "test_seconds": lg.test_seconds,
                     "train_total": math.fsum(lg.train_seconds),
                     "test_total": math.fsum(lg.test_seconds)}
              for name, lg in logs.items()}
    bundle = ResultBundle(
        config=cfg.canonical(), logs=logs,
        summary={name: lg.summary for name, lg in logs.items()},
        known_drifts=list(pcfg.known_drifts), stream_length=source.length,
        fold_summary=fold_summary, out_dir=out)
    bundle.wall_clock = {
        "started_at": started.isoformat(),
        "elapsed_seconds": time.perf_counter() - t0,
        "workers": workers,
        "output_dir": str(out),
        "timers": timers,
    }
    if write:
        write_bundle(bundle, out, pcfg, selector)
    return bundle


def write_bundle(bundle: ResultBundle, out: Path, pcfg: PipelineConfig, selector=None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.json", "w", encoding="utf-8") as fh:
        json.dump(bundle.to_json(), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    with open(out / "series.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_HEADER)
        for name, lg in bundle.logs.items():
            for mid, s in lg.series.items():
                for row in zip(s.steps, s.raw, s.windowed, s.faded):
                    w.writerow([row[0], name, mid, *row[1:]])
    with open(out / "detections.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "observation", "matched", "reset"])
        for name, lg in bundle.logs.items():
            rec = M.DetectionRecord(tuple(bundle.known_drifts), tuple(lg.detections),
                                    pcfg.tolerance)
            resets = set(lg.resets)
            for t, ok in zip(rec.detected, rec.matched()):
                w.writerow([name, t, int(ok), int(t in resets)])
    with open(out / "selections.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "step", "selected"])
        for name, lg in bundle.logs.items():
            for step, bits in lg.selections:
                w.writerow([name, step, " ".join(str(j) for j, b in enumerate(bits) if b)])
    write_figures(bundle, out / "figures", pcfg, selector)


def write_figures(bundle: ResultBundle, fig_dir: Path, pcfg: PipelineConfig,
                  selector=None) -> list[Path]:
    paths = []
    logs = bundle.logs
    first = next(iter(logs.values()))
    for mid in first.series:
        if all(len(lg.series[mid]) for lg in logs.values()):
            paths.append(report.emit_line_plot(logs, mid, fig_dir / f"line_{mid}.svg",
                                               bundle.known_drifts))
    if any(lg.detections for lg in logs.values()) or (
            bundle.known_drifts and any(M.MEASURES[m].scope == "detection"
                                        for m in pcfg.measures)):
        paths.append(report.emit_drift_scatter(
            {name: lg.detections for name, lg in logs.items()}, bundle.known_drifts,
            pcfg.tolerance, fig_dir / "drift_detections.svg", bundle.stream_length))
    if selector is not None:
        for i, (name, lg) in enumerate(logs.items()):
            if lg.selections:
                paths.append(report.emit_feature_bar(
                    [bits for _, bits in lg.selections], 10, fig_dir / f"features_{i}.svg",
                    title=f"{name}: most frequently selected features"))
    if len(logs) >= 2 and bundle.fold_summary is None:
        summaries, directions = spider_inputs(bundle)
        criteria = list(directions)
        if len(criteria) >= 2:
            paths.append(report.emit_spider(summaries, criteria, directions,
                                            fig_dir / "spider.svg"))
    return paths


def spider_inputs(bundle: ResultBundle) -> tuple[dict, dict]:
    """Criteria available for every model, with their directions."""
    summaries = {name: {} for name in bundle.logs}
    directions = {}
    candidates = [(f"{m}_mean", m) for m in M.STEP_MEASURES] + [
        ("drt_mean", "drt"), ("dpd_mean", "dpd"), ("fss_mean", "fss")]
    for key, mid in candidates:
        values = [bundle.summary[name].get(key) for name in bundle.logs]
        if all(v is not None for v in values):
            for name, v in zip(bundle.logs, values):
                summaries[name][mid] = v
            directions[mid] = M.direction(mid)
    for key in ("test_total", "train_total"):
        for name in bundle.logs:
            summaries[name][key.replace("_total", "_time")] = bundle.wall_clock["timers"][name][key]
        directions[key.replace("_total", "_time")] = M.LOWER_BETTER
    return summaries, directions
