import numpy as np
import pytest

import oracles
from streameval.detectors import Adwin, PageHinkley, make_detector


def feed(detector, values):
    return [i for i, v in enumerate(values) if detector.update(v)]


def test_page_hinkley_constant_never_alarms():
    ph = PageHinkley()
    assert feed(ph, [0.3] * 5000) == []
    assert ph.cumsum - ph.minimum == 0


def test_page_hinkley_single_shift():
    values = [0.0] * 1000 + [1.0] * 2000
    ph = PageHinkley(delta=0.005, threshold=50, min_instances=30)
    alarms = feed(ph, values)
    expected, _ = oracles.page_hinkley_first_alarm(values, 0.005, 50, 30)
    assert alarms == expected
    assert len(alarms) == 1
    assert 1000 <= alarms[0] < 1200
    assert ph.detections == alarms


def test_page_hinkley_statistic_matches_recurrence():
    values = np.random.default_rng(3).random(3000).round(2).tolist()
    ph = PageHinkley(delta=0.01, threshold=1e9, min_instances=10)
    _, trace = oracles.page_hinkley_first_alarm(values, 0.01, 1e9, 10)
    for v, expected in zip(values, trace):
        ph.update(v)
        assert abs(ph.cumsum - expected) <= 1e-9
        assert ph.minimum <= ph.cumsum


def test_page_hinkley_needs_fresh_accumulation_after_alarm():
    ph = PageHinkley(delta=0.0, threshold=5, min_instances=1)
    first = feed(ph, [0.0] * 10 + [1.0] * 20)
    assert len(first) == 1
    assert ph.count == 30 - first[0] - 1
    ph.reset()
    assert feed(ph, [1.0] * 5) == []


def test_page_hinkley_rejects_nan():
    with pytest.raises(ValueError):
        PageHinkley().update(float("nan"))


def adwin_shadow_check(values, delta=0.002):
    ad = Adwin(delta)
    for i, v in enumerate(values):
        ad.update(v)
        retained = values[i + 1 - ad.width:i + 1]
        assert ad.width == sum(size for size, _ in ad.buckets())
        assert abs(ad.mean - sum(retained) / len(retained)) <= 1e-9
        assert all(len(row) <= ad.max_buckets for row in ad.rows)
    return ad


def test_adwin_bookkeeping_against_shadow_list():
    rng = np.random.default_rng(8)
    values = np.concatenate([rng.random(3000) < 0.2, rng.random(3000) < 0.8]).astype(float)
    ad = adwin_shadow_check(values.tolist())
    assert ad.detections


def test_adwin_single_observation_never_alarms():
    assert Adwin().update(1.0) is False


def test_adwin_rejects_out_of_range():
    with pytest.raises(ValueError):
        Adwin().update(1.5)


@pytest.mark.slow
def test_adwin_false_alarms_on_stationary_bernoulli():
    quiet = 0
    for seed in range(10):
        values = (np.random.default_rng(seed).random(10_000) < 0.5).astype(float)
        ad = Adwin(0.002)
        feed(ad, values)
        quiet += len(ad.detections) <= 2
    assert quiet >= 9


@pytest.mark.slow
def test_adwin_detects_mean_shift():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        values = np.concatenate([rng.random(5000) < 0.2, rng.random(1000) < 0.8]).astype(float)
        alarms = feed(Adwin(0.002), values)
        assert any(5000 <= a < 5500 for a in alarms)


def test_detection_log_strictly_increasing():
    ph = PageHinkley(delta=0.0, threshold=3, min_instances=1)
    values = ([0.0] * 20 + [1.0] * 20) * 5
    alarms = feed(ph, values)
    assert len(alarms) > 1
    assert alarms == sorted(set(alarms))


def test_explicit_index_must_increase():
    ph = PageHinkley(delta=0.0, threshold=0.5, min_instances=1)
    assert ph.update(0.0, index=10) is False
    assert ph.update(1.0, index=11) is False
    assert ph.update(1.0, index=12) is True
    ph.update(0.0, index=13)
    ph.update(1.0, index=14)
    with pytest.raises(ValueError):
        ph.update(1.0, index=5)


@pytest.mark.parametrize("kind,param", [("page_hinkley", "delta"), ("adwin", "delta")])
def test_reset_preserves_hyperparameters(kind, param):
    det = make_detector(kind, **{param: 0.01})
    det.update(0.0)
    det.detections.append(0)
    det.reset()
    assert getattr(det, param) == 0.01
    assert det.detections == []
    fresh = make_detector(kind, **{param: 0.01})
    assert vars(det.reset()) == vars(fresh)


def test_make_detector_unknown():
    with pytest.raises(ValueError):
        make_detector("ddm")
