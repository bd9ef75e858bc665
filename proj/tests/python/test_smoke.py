import numpy as np
import pytest

import cqc


def test_sample_shapes():
    y, a, x = cqc.sample_dgp("illustrative", 6.0, 100, seed=1)
    assert y.shape == (100,)
    assert a.shape == (100,)
    assert x.shape == (100, 1)
    assert set(np.unique(a)) <= {0, 1}

    y10, _, x10 = cqc.sample_dgp("tendim", 1.0, 50, seed=1, dgp_seed=2)
    assert x10.shape == (50, 10)
    assert np.array_equal(y10, cqc.sample_dgp("tendim", 1.0, 50, seed=1, dgp_seed=2)[0])


def test_pava():
    assert cqc.pava(np.array([1.0, 3.0, 2.0, 4.0])) == [1.0, 2.5, 2.5, 4.0]
    assert cqc.pava([3.0, 1.0]) == [2.0, 2.0]
    with pytest.raises(ValueError):
        cqc.pava([])


def test_truth():
    g = cqc.g_star("illustrative", 6.0, np.array([0.7, -1.0]), np.array([0.2, 0.9]))
    assert g == pytest.approx([1.4, -2.0])


def test_estimator_tracks_truth():
    y, a, x = cqc.sample_dgp("illustrative", 6.0, 1000, seed=3)
    est = cqc.CqcEstimator(y, a, x, bandwidth_nuisance=0.03, bandwidth_outer=0.8, seed=4)
    y0 = np.linspace(-1.0, 1.0, 11)
    xq = np.full(11, 0.4)
    g = est.predict(y0, xq)
    assert g.shape == (11,)
    assert np.all(np.isin(g, est.grid))
    assert np.mean(np.abs(g - 2.0 * y0)) < 0.8
    assert est.contrast(-1e300, 1e300, np.array([0.4])) == pytest.approx(1.0)


def test_bad_input_raises():
    y, a, x = cqc.sample_dgp("illustrative", 0.0, 20, seed=3)
    with pytest.raises(ValueError):
        cqc.CqcEstimator(y, a, x, xi=0.9)
    with pytest.raises(ValueError):
        cqc.CqcEstimator(y, np.ones_like(a), x)
    with pytest.raises(ValueError):
        cqc.CqcEstimator(y[:5], a, x)


def test_simulate_report():
    report = cqc.simulate("illustrative", 6.0, n_total=300, replications=3, holdout=30, seed=2)
    assert set(report) == {"DR", "IPW", "Separate", "Oracle"}
    for row in report.values():
        assert row["replications"] == 3
        assert row["ci_low"] <= row["mean_abs_error"] <= row["ci_high"]
