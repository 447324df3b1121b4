import numpy as np
import pytest

import svgtools
from streameval import measures as M
from streameval import report
from streameval.pipelines import MeasurementLog


def fixture_log(name, values, offsets=None):
    log = MeasurementLog(name)
    series = M.MeasureSeries("accuracy", w_agg=5)
    for step, v in enumerate(values):
        series.append(step, v)
    log.series["accuracy"] = series
    log.steps = list(range(len(values)))
    log.offsets = offsets if offsets is not None else list(range(len(values)))
    log.sizes = [1] * len(values)
    return log


@pytest.fixture
def two_logs():
    rng = np.random.default_rng(0)
    return {"a": fixture_log("a", rng.random(300).tolist()),
            "b": fixture_log("b", rng.random(300).tolist())}


def test_line_plot_counts(tmp_path, two_logs):
    path = report.emit_line_plot(two_logs, "accuracy", tmp_path / "line.svg",
                                 known_drifts=[50, 150, 250])
    root = svgtools.parse(path)
    assert svgtools.ids_with_prefix(root, "series-") == ["series-0", "series-1"]
    assert len(svgtools.ids_with_prefix(root, "drift-marker-")) == 3
    assert len(svgtools.ids_with_prefix(root, "legend-entry-")) == 2
    marker = svgtools.path_points(svgtools.group(root, "drift-marker-0"))
    assert len({x for x, _ in marker}) == 1


def test_line_plot_drift_beyond_stream_is_skipped(tmp_path, two_logs):
    root = svgtools.parse(report.emit_line_plot(two_logs, "accuracy", tmp_path / "l.svg",
                                                known_drifts=[100, 5000]))
    assert len(svgtools.ids_with_prefix(root, "drift-marker-")) == 1


def test_constant_series_is_horizontal(tmp_path):
    logs = {"c": fixture_log("c", [0.75] * 40)}
    root = svgtools.parse(report.emit_line_plot(logs, "accuracy", tmp_path / "c.svg"))
    pts = svgtools.path_points(svgtools.group(root, "series-0"))
    assert len(pts) == 40
    assert len({y for _, y in pts}) == 1


def test_line_plot_errors(tmp_path):
    with pytest.raises(ValueError):
        report.emit_line_plot({}, "accuracy", tmp_path / "x.svg")
    with pytest.raises(ValueError):
        report.emit_line_plot({"a": fixture_log("a", [1.0])}, "kappa", tmp_path / "x.svg")


def test_line_plot_is_deterministic(tmp_path, two_logs):
    a = report.emit_line_plot(two_logs, "accuracy", tmp_path / "1.svg", [10]).read_bytes()
    b = report.emit_line_plot(two_logs, "accuracy", tmp_path / "2.svg", [10]).read_bytes()
    assert a == b


def test_drift_scatter_rows_and_styles(tmp_path):
    dets = {"ph": [105, 300, 920], "adwin": []}
    root = svgtools.parse(report.emit_drift_scatter(dets, [100, 900], 50, tmp_path / "s.svg",
                                                    stream_length=1000))
    assert svgtools.ids_with_prefix(root, "detector-row-") == ["detector-row-0", "detector-row-1"]
    assert len(svgtools.ids_with_prefix(root, "known-drift-")) == 2
    assert svgtools.ids_with_prefix(root, "detection-matched-") == [
        "detection-matched-0-0", "detection-matched-0-2"]
    assert svgtools.ids_with_prefix(root, "detection-false-") == ["detection-false-0-1"]
    assert not [i for i in svgtools.ids_with_prefix(root, "detection-matched-")
                if i.startswith("detection-matched-1-")]


def test_drift_scatter_needs_a_row(tmp_path):
    with pytest.raises(ValueError):
        report.emit_drift_scatter({}, [1], 5, tmp_path / "s.svg")


def test_feature_bar_caps_and_orders(tmp_path):
    history = [[1, 0, 1, 0], [1, 1, 0, 0], [1, 0, 1, 0]]
    freq = report.selection_frequency(history)
    assert freq.tolist() == [1.0, 1 / 3, 2 / 3, 0.0]
    root = svgtools.parse(report.emit_feature_bar(history, 10, tmp_path / "b.svg"))
    bars = [el.get("id") for el in root.iter() if (el.get("id") or "").startswith("bar-")
            and not el.get("id").startswith("bar-label")]
    assert bars == ["bar-0", "bar-2", "bar-1", "bar-3"]
    labels = [el for el in root.iter() if (el.get("id") or "").startswith("bar-label-")]
    assert len(labels) == 4


def test_feature_bar_tie_order_and_top_n(tmp_path):
    history = [[1, 1, 1, 0, 0]] * 4
    root = svgtools.parse(report.emit_feature_bar(history, 2, tmp_path / "b.svg"))
    bars = [el.get("id") for el in root.iter() if (el.get("id") or "").startswith("bar-")
            and not el.get("id").startswith("bar-label")]
    assert bars == ["bar-0", "bar-1"]


def test_feature_bar_full_height(tmp_path):
    root = svgtools.parse(report.emit_feature_bar([[1, 0]] * 3, 5, tmp_path / "b.svg"))
    full = svgtools.path_points(svgtools.group(root, "bar-0"))
    empty = svgtools.path_points(svgtools.group(root, "bar-1"))
    ys = [y for _, y in full]
    assert max(ys) - min(ys) > 0
    assert len({y for _, y in empty}) == 1


def test_feature_bar_empty_history(tmp_path):
    with pytest.raises(ValueError):
        report.emit_feature_bar([], 3, tmp_path / "b.svg")


DIRS = {"accuracy": M.HIGHER_BETTER, "test_time": M.LOWER_BETTER}


def test_spider_normalization():
    s = {"a": {"accuracy": 0.9, "test_time": 1.0},
         "b": {"accuracy": 0.7, "test_time": 3.0},
         "c": {"accuracy": 0.8, "test_time": 2.0}}
    scaled = report.spider_normalize(s, ["accuracy", "test_time"], DIRS)
    assert scaled["a"] == [1.0, 1.0]
    assert scaled["b"] == [0.0, 0.0]
    assert scaled["c"] == pytest.approx([0.5, 0.5])


def test_spider_single_model_and_ties():
    s = {"only": {"accuracy": 0.9, "test_time": 2.0}}
    assert report.spider_normalize(s, ["accuracy", "test_time"], DIRS) == {"only": [0.5, 0.5]}


def test_spider_inversion_only_flips_that_axis():
    s = {"a": {"accuracy": 0.9, "test_time": 1.0}, "b": {"accuracy": 0.7, "test_time": 3.0}}
    plain = report.spider_normalize(s, ["accuracy", "test_time"],
                                    {"accuracy": M.HIGHER_BETTER, "test_time": M.HIGHER_BETTER})
    flipped = report.spider_normalize(s, ["accuracy", "test_time"], DIRS)
    for name in s:
        assert plain[name][0] == flipped[name][0]
        assert plain[name][1] == 1.0 - flipped[name][1]


def test_spider_file(tmp_path):
    s = {"a": {"accuracy": 0.9, "test_time": 1.0, "kappa": 0.5},
         "b": {"accuracy": 0.7, "test_time": 3.0, "kappa": 0.6}}
    dirs = dict(DIRS, kappa=M.HIGHER_BETTER)
    root = svgtools.parse(report.emit_spider(s, ["accuracy", "test_time", "kappa"], dirs,
                                             tmp_path / "sp.svg"))
    assert svgtools.ids_with_prefix(root, "polygon-") == ["polygon-0", "polygon-1"]
    assert len(svgtools.ids_with_prefix(root, "axis-")) == 3
    pts = svgtools.path_points(svgtools.group(root, "polygon-0"))
    assert pts[0] == pytest.approx(pts[-1])


def test_spider_preconditions(tmp_path):
    with pytest.raises(ValueError):
        report.emit_spider({"a": {"accuracy": 1}}, ["accuracy"], DIRS, tmp_path / "x.svg")
    with pytest.raises(ValueError):
        report.emit_spider({"a": {"accuracy": 1}}, ["accuracy", "test_time"], DIRS,
                           tmp_path / "x.svg")
