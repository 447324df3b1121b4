"""SVG report figures rendered with matplotlib.

Every datum gets a stable ``gid`` so the emitted SVG carries one
``<g id=...>`` element per polyline, marker, glyph, bar or polygon:

* line plot: ``series-<i>``, ``drift-marker-<i>``, ``legend-entry-<i>``
* drift scatter: ``detector-row-<r>``, ``known-drift-<i>``,
  ``detection-matched-<r>-<i>`` / ``detection-false-<r>-<i>``
* feature bar: ``bar-<feature>``, ``bar-label-<feature>``
* spider: ``polygon-<i>``, ``axis-<j>``
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from . import measures as M

WIDTH_PX, HEIGHT_PX, DPI = 960, 540, 100

matplotlib.rcParams.update({
    "svg.hashsalt": "streameval",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
})

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _figure(size=(WIDTH_PX, HEIGHT_PX)) -> Figure:
    return Figure(figsize=(size[0] / DPI, size[1] / DPI), dpi=DPI)


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def emit_line_plot(logs: Mapping, measure: str, path, known_drifts: Sequence[int] = (),
                   title: str | None = None) -> Path:
    """Windowed series of ``measure`` for every model, one line each.

    ``known_drifts`` are observation indices; each becomes a vertical marker
    at the first tested step whose batch reaches it.
    """
    if not logs:
        raise ValueError("no logs to plot")
    fig = _figure()
    ax = fig.add_subplot()
    for i, (name, log) in enumerate(logs.items()):
        series = log.series.get(measure)
        if series is None or not len(series):
            raise ValueError(f"model {name!r} has no values for {measure!r}")
        ax.plot(series.steps, series.windowed, color=COLORS[i % len(COLORS)], lw=1.2,
                label=name, gid=f"series-{i}")
    ref = next(iter(logs.values()))
    markers = 0
    for t in known_drifts:
        pos = ref.step_position(t)
        if pos is None:
            continue
        ax.axvline(ref.steps[pos], color="0.3", ls="--", lw=0.8, gid=f"drift-marker-{markers}")
        markers += 1
    ax.set_xlabel("time step")
    ax.set_ylabel(f"{measure} (sliding window, w={ref.series[measure].w_agg})")
    ax.set_title(title or measure)
    legend = ax.legend(loc="best", frameon=False)
    legend.set_gid("legend")
    for i, text in enumerate(legend.get_texts()):
        text.set_gid(f"legend-entry-{i}")
    return _save(fig, path)


def emit_drift_scatter(detections: Mapping[str, Sequence[int]], known_drifts: Sequence[int],
                       tolerance: int, path, stream_length: int | None = None) -> Path:
    """One row per detector with a glyph per alarm; known drifts span all rows.

    Alarms inside some ``[t_d, t_d + tolerance]`` window are drawn filled,
    the others hollow.
    """
    if not detections:
        raise ValueError("need at least one detector row")
    fig = _figure()
    ax = fig.add_subplot()
    for i, t_d in enumerate(known_drifts):
        ax.axvspan(t_d, t_d + tolerance, color="0.9", lw=0)
        ax.axvline(t_d, color="0.3", ls="--", lw=0.8, gid=f"known-drift-{i}")
    names = list(detections)
    for r, name in enumerate(names):
        ax.axhline(r, color="0.75", lw=0.6, gid=f"detector-row-{r}")
        rec = M.DetectionRecord(tuple(known_drifts), tuple(detections[name]), tolerance)
        for i, (t, ok) in enumerate(zip(rec.detected, rec.matched())):
            if ok:
                ax.plot([t], [r], marker="o", ms=7, color=COLORS[r % len(COLORS)], ls="none",
                        gid=f"detection-matched-{r}-{i}")
            else:
                ax.plot([t], [r], marker="o", ms=7, mfc="none", color=COLORS[r % len(COLORS)],
                        ls="none", gid=f"detection-false-{r}-{i}")
    ax.set_yticks(range(len(names)), names)
    ax.set_ylim(-0.75, len(names) - 0.25)
    if stream_length:
        ax.set_xlim(0, stream_length)
    ax.set_xlabel("observation")
    ax.set_title("detected drifts (filled: within tolerance of a known drift)")
    return _save(fig, path)


def selection_frequency(history: Sequence[Sequence[int]]) -> np.ndarray:
    A = np.asarray(history, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0:
        raise ValueError("selection history is empty")
    return A.mean(axis=0)


def emit_feature_bar(history: Sequence[Sequence[int]], top_n: int, path,
                     title: str | None = None) -> Path:
    """Bars for the ``top_n`` most frequently selected features."""
    freq = selection_frequency(history)
    order = np.argsort(-freq, kind="stable")[:top_n]
    fig = _figure()
    ax = fig.add_subplot()
    for x, j in enumerate(order):
        ax.bar(x, freq[j], color=COLORS[0], width=0.7, gid=f"bar-{j}")
        ax.text(x, freq[j] + 0.01, f"{freq[j]:.2f}", ha="center", va="bottom", fontsize=8,
                gid=f"bar-label-{j}")
    ax.set_xticks(range(len(order)), [str(j) for j in order])
    ax.set_ylim(0, 1.1)
    ax.set_xlabel("feature index")
    ax.set_ylabel("selection frequency")
    ax.set_title(title or f"top {len(order)} selected features")
    return _save(fig, path)


def spider_normalize(summaries: Mapping[str, Mapping[str, float]], criteria: Sequence[str],
                     directions: Mapping[str, str]) -> dict[str, list[float]]:
    """Min-max scale each criterion across models so that outward is better.

    A criterion on which all models tie maps to 0.5 for every model.
    """
    out = {name: [] for name in summaries}
    for c in criteria:
        values = [float(summaries[name][c]) for name in summaries]
        lo, hi = min(values), max(values)
        for name, v in zip(summaries, values):
            if hi == lo:
                s = 0.5
            else:
                s = (v - lo) / (hi - lo)
                if directions[c] == M.LOWER_BETTER:
                    s = 1.0 - s
            out[name].append(s)
    return out


def emit_spider(summaries: Mapping[str, Mapping[str, float]], criteria: Sequence[str],
                directions: Mapping[str, str], path) -> Path:
    if len(criteria) < 2:
        raise ValueError("a spider chart needs at least two criteria")
    for name, summary in summaries.items():
        missing = [c for c in criteria if summary.get(c) is None]
        if missing:
            raise ValueError(f"model {name!r} lacks criteria {missing}")
    scaled = spider_normalize(summaries, criteria, directions)
    angles = [2 * math.pi * j / len(criteria) for j in range(len(criteria))]
    fig = _figure((HEIGHT_PX + 120, HEIGHT_PX))
    ax = fig.add_subplot(projection="polar")
    for j, a in enumerate(angles):
        ax.plot([a, a], [0, 1], color="0.8", lw=0.6, gid=f"axis-{j}")
    for i, (name, vals) in enumerate(scaled.items()):
        color = COLORS[i % len(COLORS)]
        ax.plot(angles + angles[:1], vals + vals[:1], color=color, lw=1.5, label=name,
                gid=f"polygon-{i}")
        ax.fill(angles, vals, color=color, alpha=0.15)
    labels = [c + (" (inv.)" if directions[c] == M.LOWER_BETTER else "") for c in criteria]
    ax.set_xticks(angles, labels)
    ax.set_ylim(0, 1)
    ax.set_yticks([0.25, 0.5, 0.75, 1.0], [])
    ax.legend(loc="upper right", bbox_to_anchor=(1.3, 1.1), frameon=False)
    return _save(fig, path)
