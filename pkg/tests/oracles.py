"""Independent brute-force references used by the tests.

Nothing here imports the package; each function evaluates a definition
literally (set enumeration, explicit loops) so it can check the optimized
implementations.
"""

import math
import statistics


def dcr(known, detected, W):
    detected = set(detected)
    hits = 0
    for t_d in known:
        window = set(range(t_d, t_d + W + 1))
        if window & detected:
            hits += 1
    return hits / len(known)


def matched_detections(known, detected, W):
    """Detection -> earliest known drift whose window holds it (or None)."""
    out = {}
    for t in detected:
        out[t] = None
        for t_d in sorted(known):
            if t in range(t_d, t_d + W + 1):
                out[t] = t_d
                break
    return out


def fdr(known, detected, W):
    if not detected:
        return None
    match = matched_detections(known, detected, W)
    true_pos = sum(1 for v in match.values() if v is not None)
    return 1 - true_pos / len(detected)


def mtfa(known, detected, W, stream_length):
    match = matched_detections(known, detected, W)
    false = sorted(t for t, v in match.items() if v is None)
    if len(false) < 2:
        return float(stream_length)
    return statistics.mean(b - a for a, b in zip(false, false[1:]))


def md(known, detected, W):
    delays = []
    for t_d in known:
        inside = [t for t in sorted(detected) if t_d <= t <= t_d + W]
        if inside:
            delays.append(inside[0] - t_d)
    return statistics.mean(delays) if delays else None


def mtr(known, detected, W, stream_length):
    d = md(known, detected, W)
    if d is None or d == 0:
        return None
    return mtfa(known, detected, W, stream_length) / d * dcr(known, detected, W)


def fss(history):
    """Feature set stability evaluated term by term in floats."""
    w = len(history)
    m = len(history[0])
    k = sum(history[0])
    total = 0.0
    for j in range(m):
        p = sum(row[j] for row in history) / w
        total += w / (w - 1) * p * (1 - p)
    return 1 - (total / m) / ((k / m) * (1 - k / m))


def confusion(y_true, y_pred, classes):
    return {(a, b): sum(1 for t, p in zip(y_true, y_pred) if t == a and p == b)
            for a in classes for b in classes}


def kappa(y_true, y_pred, classes):
    n = len(y_true)
    c = confusion(y_true, y_pred, classes)
    p_o = sum(c[(a, a)] for a in classes) / n
    p_e = sum(sum(c[(a, b)] for b in classes) * sum(c[(b, a)] for b in classes)
              for a in classes) / n ** 2
    if p_e == 1:
        return 0.0
    return (p_o - p_e) / (1 - p_e)


def f1(y_true, y_pred, zero_division=0.0):
    c = confusion(y_true, y_pred, (0, 1))
    tp, fp, fn = c[(1, 1)], c[(0, 1)], c[(1, 0)]
    if tp + fp == 0 or tp + fn == 0 or tp == 0:
        return zero_division
    p, r = tp / (tp + fp), tp / (tp + fn)
    return 2 * p * r / (p + r)


def gaussian_cdf(x):
    return 0.5 * (1 + math.erf(x / math.sqrt(2)))


def windowed_means(values, w):
    return [sum(values[max(0, i - w + 1):i + 1]) / (i + 1 - max(0, i - w + 1))
            for i in range(len(values))]


def faded_means(values, alpha):
    """Explicit exponentially weighted average at every t (O(n^2))."""
    import numpy as np

    v = np.asarray(values, dtype=float)
    out = []
    for t in range(len(v)):
        weights = alpha ** np.arange(t, -1, -1, dtype=float)
        out.append(float((weights * v[:t + 1]).sum() / weights.sum()))
    return out


def page_hinkley_first_alarm(values, delta, threshold, min_instances):
    """Direct recurrence; returns (alarm indices, cumulative statistic trace)."""
    alarms, trace = [], []
    n, mean, m, low = 0, 0.0, 0.0, 0.0
    for i, v in enumerate(values):
        n += 1
        mean = mean + (v - mean) / n
        m = m + v - mean - delta
        low = min(low, m)
        trace.append(m)
        if n >= min_instances and m - low > threshold:
            alarms.append(i)
            n, mean, m, low = 0, 0.0, 0.0, 0.0
    return alarms, trace
