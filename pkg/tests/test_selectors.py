import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from streameval.selectors import OFS, apply_selection, make_selector, top_k
from streameval.stream import Batch


def test_top_k_largest_magnitude():
    ofs = OFS(3, k=1)
    ofs.weights = np.array([0.5, -0.3, 0.1])
    assert ofs.selection().tolist() == [1, 0, 0]


def test_zero_weights_tie_to_lowest_index():
    assert OFS(5, k=2).selection().tolist() == [1, 1, 0, 0, 0]
    assert top_k(np.array([1.0, 2.0, 2.0, 1.0]), 2).tolist() == [0, 1, 1, 0]


def test_single_update_worked_example():
    ofs = OFS(2, k=1, learning_rate=0.2, regularization=0.01)
    bits = ofs.update_select(np.array([[1.0, 0.0]]), np.array([1]))
    assert ofs.weights.tolist() == [0.2, 0.0]
    assert ofs.radius == 10.0
    assert bits.tolist() == [1, 0]


def test_correct_rows_do_not_update():
    ofs = OFS(2, k=2)
    ofs.weights = np.array([1.0, 0.0])
    ofs.update_select(np.array([[2.0, 5.0]]), np.array([1]))
    assert ofs.weights.tolist() == [1.0, 0.0]


def test_projection_caps_norm():
    ofs = OFS(2, k=2, learning_rate=100.0, regularization=0.25)
    ofs.update_select(np.array([[3.0, 4.0]]), np.array([1]))
    assert np.linalg.norm(ofs.weights) == pytest.approx(2.0)


def test_validation():
    with pytest.raises(ValueError):
        OFS(3, k=4)
    with pytest.raises(ValueError):
        OFS(3, k=0)
    with pytest.raises(ValueError):
        OFS(2, k=1).update_select(np.ones((1, 2)), np.array([2]))
    with pytest.raises(ValueError):
        make_selector("fires", 3, k=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000),
       st.floats(0.01, 5.0), st.floats(0.001, 1.0))
def test_update_invariants(k, seed, lr, reg):
    m = 6
    rng = np.random.default_rng(seed)
    ofs = OFS(m, k=k, learning_rate=lr, regularization=reg)
    for _ in range(20):
        X = rng.normal(scale=3, size=(5, m))
        y = rng.integers(0, 2, 5)
        bits = ofs.update_select(X, y)
        assert np.count_nonzero(ofs.weights) <= k
        assert np.linalg.norm(ofs.weights) <= ofs.radius + 1e-9
        assert np.isfinite(ofs.weights).all()
        assert bits.sum() == k
        assert bits.tolist() == top_k(np.abs(ofs.weights), k).tolist()


def _batch(X):
    return Batch(0, X, np.zeros(len(X), dtype=int))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-1e6, 1e6)),
       arrays(np.int8, 5, elements=st.integers(0, 1)))
def test_masking_properties(X, bits):
    b = _batch(X)
    assert np.array_equal(apply_selection(b, np.ones(5, dtype=np.int8)).features, X)
    once = apply_selection(b, bits)
    twice = apply_selection(once, bits)
    assert np.array_equal(once.features, twice.features)
    assert once.features.shape == X.shape
    assert (once.features[:, bits == 0] == 0).all()
    assert np.array_equal(once.features[:, bits == 1], X[:, bits == 1])


def test_masking_width_mismatch():
    with pytest.raises(ValueError):
        apply_selection(_batch(np.ones((2, 3))), np.ones(4))


def test_reset_and_clone():
    ofs = OFS(3, k=1)
    twin = ofs.clone()
    ofs.update_select(np.array([[0.0, 0.0, 1.0]]), np.array([1]))
    assert twin.weights.tolist() == [0.0, 0.0, 0.0]
    ofs.reset()
    assert ofs.weights.tolist() == [0.0, 0.0, 0.0]
    assert ofs.learning_rate == 0.2 and ofs.regularization == 0.01
