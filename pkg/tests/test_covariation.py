import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from sarcv import (
    ADJUSTED,
    PLAIN,
    CovariationEstimator,
    EstimatorSpec,
    IncrementSet,
    MahalanobisRule,
    adjusted_increments,
    long_span_estimate,
    plain_increments,
    realized_covariation,
)


def make_set(rows, kind=ADJUSTED, flags=None):
    return IncrementSet(values=np.asarray(rows, dtype=float), kind=kind, flags=flags)


def test_zero_increments_give_zero_matrix():
    out = realized_covariation(make_set(np.zeros((5, 3))), EstimatorSpec())
    np.testing.assert_array_equal(out, np.zeros((3, 3)))


def test_start_index_two_skips_first_row():
    rows = np.array([[1.0, 0.0], [0.0, 2.0]])
    out = realized_covariation(make_set(rows), EstimatorSpec(start_index=2))
    np.testing.assert_array_equal(out, [[0.0, 0.0], [0.0, 4.0]])
    both = realized_covariation(make_set(rows), EstimatorSpec(start_index=1))
    np.testing.assert_array_equal(both, [[1.0, 0.0], [0.0, 4.0]])


def test_partition_identity():
    """Downward plus upward truncation equals the untruncated sum exactly."""
    rng = np.random.default_rng(0)
    rows = rng.standard_normal((30, 7))
    flags = rng.random(30) < 0.3
    inc = make_set(rows)
    total = realized_covariation(inc, EstimatorSpec(keep="all"))
    small = realized_covariation(inc, EstimatorSpec(keep="small"), flags)
    large = realized_covariation(inc, EstimatorSpec(keep="large"), flags)
    assert np.abs(small + large - total).max() < 1e-12 * max(1.0, np.abs(total).max())


def test_homogeneity():
    rng = np.random.default_rng(4)
    rows = rng.standard_normal((12, 5))
    base = realized_covariation(make_set(rows), EstimatorSpec())
    scaled = realized_covariation(make_set(2.0 * rows), EstimatorSpec())
    np.testing.assert_allclose(scaled, 4.0 * base, rtol=1e-12)


def test_kind_mismatch_rejected():
    inc = make_set(np.ones((4, 3)), kind=PLAIN)
    with pytest.raises(ValueError):
        realized_covariation(inc, EstimatorSpec(kind=ADJUSTED))


def test_truncated_needs_flags():
    inc = make_set(np.ones((4, 3)))
    with pytest.raises(ValueError):
        realized_covariation(inc, EstimatorSpec(keep="small"))
    with pytest.raises(ValueError):
        realized_covariation(inc, EstimatorSpec(keep="large"), np.zeros(3, dtype=bool))


def test_flags_can_ride_on_the_increment_set():
    rows = np.array([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    flags = np.array([False, False, True])
    inc = make_set(rows, flags=flags)
    small = realized_covariation(inc, EstimatorSpec(keep="small", start_index=1))
    np.testing.assert_array_equal(small, np.eye(2))


def test_all_rows_flagged_gives_zero_matrix():
    rows = np.ones((4, 3))
    flags = np.ones(4, dtype=bool)
    out = realized_covariation(make_set(rows), EstimatorSpec(keep="small"), flags)
    np.testing.assert_array_equal(out, np.zeros((3, 3)))


def test_estimator_spec_validation():
    with pytest.raises(ValueError):
        EstimatorSpec(keep="most")
    with pytest.raises(ValueError):
        EstimatorSpec(start_index=3)


def test_output_is_symmetric():
    rng = np.random.default_rng(14)
    rows = rng.standard_normal((25, 9))
    out = realized_covariation(make_set(rows), EstimatorSpec())
    assert np.array_equal(out, out.T)


def test_spatially_constant_walk_has_equal_adjusted_and_plain():
    """Constants are shift-invariant, so both increment kinds coincide exactly."""
    rng = np.random.default_rng(6)
    levels = rng.standard_normal(12).cumsum()
    samples = np.tile(levels[:, None], (1, 9))
    adj = adjusted_increments(samples)
    pln = plain_increments(samples)
    np.testing.assert_array_equal(adj.values, pln.values)
    a = realized_covariation(adj, EstimatorSpec(kind=ADJUSTED))
    p = realized_covariation(pln, EstimatorSpec(kind=PLAIN))
    np.testing.assert_array_equal(a, p)


def test_long_span_estimate_scales_with_prefactor():
    rng = np.random.default_rng(10)
    samples = rng.standard_normal((41, 11)).cumsum(axis=0)
    one = long_span_estimate(samples, None, 1.0)
    two = long_span_estimate(samples, None, 2.0)
    assert one.shape == (10, 10)
    np.testing.assert_allclose(two, 2.0 * one, rtol=1e-14)
    with pytest.raises(ValueError):
        long_span_estimate(samples, None, 0.0)


def test_long_span_estimate_truncates_under_rule():
    # spatially constant walk: every increment row is a multiple of the ones vector
    rng = np.random.default_rng(13)
    n = 10
    levels = 0.01 * rng.standard_normal(101).cumsum()
    samples = np.tile(levels[:, None], (1, n + 1))
    samples[60:] += 4.0  # one large level shift
    kept_all = long_span_estimate(samples, None, 1.0)
    truncated = long_span_estimate(samples, MahalanobisRule(), 1.0)
    # the shifted step contributes ~16 per entry to the untruncated sum
    assert np.abs(kept_all).max() > 10.0
    assert np.abs(truncated).max() < 1.0


class TestCovariationEstimator:
    def test_fit_attributes(self):
        rng = np.random.default_rng(1)
        field = rng.standard_normal((21, 13)).cumsum(axis=0)
        est = CovariationEstimator().fit(field)
        assert est.covariation_.shape == (12, 12)
        assert est.n_steps_ == 20
        assert est.delta_ == pytest.approx(1.0 / 12)
        assert est.report_.n_flagged == 0
        assert est.increments_.kind == ADJUSTED

    def test_matches_functional_form(self):
        rng = np.random.default_rng(2)
        field = rng.standard_normal((31, 9)).cumsum(axis=0)
        est = CovariationEstimator(increments="plain", start_index=1).fit(field)
        expected = realized_covariation(
            plain_increments(field), EstimatorSpec(kind=PLAIN, start_index=1)
        )
        np.testing.assert_array_equal(est.covariation_, expected)

    def test_truncation_path(self):
        rng = np.random.default_rng(3)
        field = 0.01 * rng.standard_normal((41, 9)).cumsum(axis=0)
        field[25:] += 2.0
        est = CovariationEstimator(truncation=MahalanobisRule(), keep="small").fit(field)
        assert est.report_.n_flagged >= 1
        untrunc = CovariationEstimator().fit(field)
        assert np.abs(est.covariation_).max() < np.abs(untrunc.covariation_).max()

    def test_sklearn_params_roundtrip(self):
        est = CovariationEstimator(increments="plain", keep="large", start_index=1, delta=0.5)
        params = est.get_params()
        assert params["increments"] == "plain"
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_eigenpairs_requires_fit(self):
        with pytest.raises(NotFittedError):
            CovariationEstimator().eigenpairs()

    def test_bad_increment_kind(self):
        with pytest.raises(ValueError):
            CovariationEstimator(increments="both").fit(np.zeros((4, 4)))
