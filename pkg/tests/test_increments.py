import numpy as np
import pytest

from sarcv import ADJUSTED, PLAIN, IncrementSet, adjusted_increments, plain_increments


def test_explicit_two_by_two():
    samples = np.array([[7.0, 3.0], [5.0, 9.0]])
    adj = adjusted_increments(samples)
    assert adj.kind == ADJUSTED
    np.testing.assert_array_equal(adj.values, [[2.0]])  # 5 - 3
    pln = plain_increments(samples)
    assert pln.kind == PLAIN
    np.testing.assert_array_equal(pln.values, [[-2.0]])  # 5 - 7


def test_shapes():
    samples = np.zeros((4, 7))
    adj = adjusted_increments(samples)
    assert adj.values.shape == (3, 6)
    assert adj.n_steps == 3
    assert adj.n_space == 6


def test_constant_field_has_zero_increments():
    samples = np.full((6, 6), 2.5)
    assert not adjusted_increments(samples).values.any()
    assert not plain_increments(samples).values.any()


def test_pure_transport_cancels_adjusted_exactly():
    """A field that only shifts left has exactly zero adjusted increments."""
    rng = np.random.default_rng(3)
    h = rng.standard_normal(16)
    n = 5
    samples = np.array([[h[i + j] for j in range(n + 1)] for i in range(n + 1)])
    assert not adjusted_increments(samples).values.any()
    assert plain_increments(samples).values.any()


def test_transported_linear_profile():
    # f_i(x) = x + i/n: plain increments are the drift 1/n, adjusted are zero
    n = 8
    x = np.arange(1, n + 2) / n
    samples = np.array([x + i / n for i in range(n + 1)])
    np.testing.assert_allclose(plain_increments(samples).values, 1.0 / n, atol=1e-15)
    np.testing.assert_allclose(adjusted_increments(samples).values, 0.0, atol=1e-15)


def test_linearity():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((7, 7))
    b = rng.standard_normal((7, 7))
    for make in (adjusted_increments, plain_increments):
        combined = make(a + b).values
        np.testing.assert_allclose(combined, make(a).values + make(b).values, atol=1e-12)


def test_minimum_size_enforced():
    with pytest.raises(ValueError):
        adjusted_increments(np.zeros((1, 5)))
    with pytest.raises(ValueError):
        plain_increments(np.zeros((5, 1)))
    with pytest.raises(ValueError):
        adjusted_increments(np.array([np.nan * np.ones(3)] * 3))


def test_increment_set_validation():
    values = np.zeros((3, 4))
    with pytest.raises(ValueError):
        IncrementSet(values=values, kind="weird")
    with pytest.raises(ValueError):
        IncrementSet(values=values, kind=ADJUSTED, flags=np.zeros(2, dtype=bool))
    ok = IncrementSet(values=values, kind=ADJUSTED, flags=np.zeros(3, dtype=bool))
    assert ok.flags is not None
