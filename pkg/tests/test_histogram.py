import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privdensity import histogram as hg
from privdensity.budget import PrivacyBudget
from privdensity.densities import Uniform, make_triangle, sample
from privdensity.errors import ConfigError, DomainError, InputError
from privdensity.risk import EstimatorConfig, Metric, mc_risk
from privdensity.streams import make_stream


@pytest.mark.parametrize(
    "n,budget,h",
    [
        (1000, None, 0.1),
        (1000, PrivacyBudget.pure(0.001), 1.0),
        (10**6, PrivacyBudget.pure(0.01), 0.01),
        (8, None, 0.5),
        (1, None, 1.0),
        (10**6, PrivacyBudget.zcdp(1e-4), 0.01),
        (1000, PrivacyBudget.pure(0.1), 0.1),
        (999, None, 1 / 10),
        (1001, None, 1 / 11),
    ],
)
def test_tuned_bandwidth(n, budget, h):
    assert hg.tuned_bandwidth(n, budget) == pytest.approx(h, rel=1e-12)


def test_tuned_bandwidth_errors():
    with pytest.raises(ConfigError):
        hg.tuned_bandwidth(100, PrivacyBudget.approx(1.0, 1e-6))
    with pytest.raises(DomainError):
        hg.tuned_bandwidth(0, None)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**7), st.floats(1e-4, 10.0))
def test_tuned_bandwidth_is_reciprocal_integer(n, eps):
    h = hg.tuned_bandwidth(n, PrivacyBudget.pure(eps))
    assert hg.n_bins(h) * h == pytest.approx(1.0)
    assert h <= 1.0
    # rounding 1/raw up to an integer shrinks h by less than one bin
    raw = min(max(n ** (-1 / 3), (n * eps) ** -0.5), 1.0)
    assert h <= raw * (1 + 1e-9)
    assert 1 / h < 1 / raw + 1


def test_fit_example():
    est = hg.fit([0.1, 0.2, 0.3, 0.4], 0.5, None, make_stream(0))
    assert est.noisy_heights.tolist() == [2.0, 0.0]
    assert est.eval(0.25) == 2.0
    assert est.eval(0.75) == 0.0
    assert est.eval(1.0) == 0.0
    assert hg.eval(est, 0.5) == 0.0


def test_boundary_convention():
    est = hg.fit([0.0, 0.5, 1.0, 1.0], 0.5, None, make_stream(0))
    assert est.noisy_heights.tolist() == [0.5, 1.5]


def test_noiseless_is_density():
    x = sample(make_triangle(2.0, 0.4, 0.2), 5000, make_stream(1))
    est = hg.fit(x, 0.05, None, make_stream(2))
    assert est.bins == 20
    assert np.all(est.noisy_heights >= 0)
    assert math.fsum(est.noisy_heights * est.h) == pytest.approx(1.0, abs=1e-12)


def test_uniform_heights_within_binomial_error():
    n = 10**5
    est = hg.fit(sample(Uniform(), n, make_stream(3)), 0.1, None, make_stream(4))
    assert np.all(np.abs(est.noisy_heights - 1.0) <= 4 * math.sqrt(10 * 0.9 / n) * 10)


@pytest.mark.parametrize("data", [[0.5, 1.2], [-0.1], [float("nan")], []])
def test_fit_rejects_bad_data(data):
    with pytest.raises(InputError):
        hg.fit(data, 0.5, None, make_stream(0))


def test_eval_rejects_outside():
    est = hg.fit([0.3], 0.5, None, make_stream(0))
    with pytest.raises(InputError):
        est.eval(1.5)


@pytest.mark.parametrize("h", [0.3, 0.0, 1.5, 0.15])
def test_non_integer_bins(h):
    with pytest.raises(DomainError):
        hg.fit([0.3], h, None, make_stream(0))


def test_approx_budget_rejected():
    with pytest.raises(ConfigError):
        hg.fit([0.3], 0.5, PrivacyBudget.approx(1.0, 1e-5), make_stream(0))


@pytest.mark.parametrize(
    "budget,var_z",
    [(PrivacyBudget.pure(0.5), 2 * (2 / 0.5) ** 2), (PrivacyBudget.zcdp(0.2), 1 / 0.2)],
)
def test_privacy_noise_variance(budget, var_z):
    data = sample(make_triangle(1.0, 0.5, 0.2), 200, make_stream(5))
    h, n = 0.25, 200
    assert hg.height_noise_variance(n, h, budget) == pytest.approx(var_z / (n * h) ** 2)
    clean = hg.fit(data, h, None, make_stream(0)).noisy_heights
    rng = make_stream(6)
    heights = np.array([hg.fit(data, h, budget, rng).noisy_heights for _ in range(100_000)])
    emp = heights.var(axis=0, ddof=1)
    assert np.allclose(emp, var_z / (n * h) ** 2, rtol=0.05)
    assert np.allclose(heights.mean(axis=0), clean, atol=5 * math.sqrt(var_z / 1e5) / (n * h))


def test_bias_bound_on_triangle():
    # slope L across the bin [0.4, 0.45): the noiseless bias is L h / 2
    L, h, n, reps = 10.0, 0.05, 1000, 10_000
    f = make_triangle(L, 0.5, 0.2)
    x0 = 0.4
    rng = make_stream(7)
    vals = np.array([hg.fit(sample(f, n, rng), h, None, rng).eval(x0) for _ in range(reps)])
    se = vals.std(ddof=1) / math.sqrt(reps)
    assert abs(vals.mean() - f.pdf(x0)) <= L * h / 2 + 4 * se


@pytest.mark.parametrize("budget", [None, PrivacyBudget.pure(1.0), PrivacyBudget.zcdp(0.5)], ids=["none", "pure", "zcdp"])
@pytest.mark.parametrize("n,h", [(100, 0.1), (1000, 0.05), (1000, 0.2)])
def test_pointwise_mse_decomposition(budget, n, h):
    L = 4.0
    f = make_triangle(L, 0.5, 0.2)
    cfg = EstimatorConfig("histogram", budget, h=h)
    rep = mc_risk(cfg, f, Metric.pointwise(0.42), n, 400, seed=11)
    var_z = hg.height_noise_variance(n, h, budget) * (n * h) ** 2
    bound = 3 * (L + 1) * (h * h + 1 / (n * h) + var_z / (n * h) ** 2)
    assert rep.risk_mean <= bound


def test_csv_export(tmp_path):
    est = hg.fit([0.1, 0.6, 0.7], 0.5, None, make_stream(0))
    p = tmp_path / "h.csv"
    est.to_csv(p, ["n = 3"])
    lines = p.read_text().splitlines()
    assert lines[0] == "# n = 3"
    assert lines[1] == "bin_left,bin_right,height"
    assert lines[2].split(",") == ["0.0", "0.5", repr(2 / 3)]


def test_estimate_immutable():
    est = hg.fit([0.1, 0.6], 0.5, None, make_stream(0))
    with pytest.raises(ValueError):
        est.noisy_heights[0] = 3.0


def test_reproducible_fit():
    data = [0.1, 0.2, 0.7]
    a = hg.fit(data, 0.25, PrivacyBudget.pure(1.0), make_stream(9)).noisy_heights
    b = hg.fit(data, 0.25, PrivacyBudget.pure(1.0), make_stream(9)).noisy_heights
    assert np.array_equal(a, b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20))
def test_project_to_simplex(vals):
    est = hg.HistogramEstimate(1 / len(vals), np.array(vals), 10, None)
    proj = hg.project_to_simplex(est)
    assert np.all(proj.noisy_heights >= 0)
    assert math.fsum(proj.noisy_heights) * proj.h == pytest.approx(1.0, abs=1e-9)


def test_project_keeps_densities():
    est = hg.HistogramEstimate(0.25, np.array([0.5, 1.5, 1.0, 1.0]), 10, None)
    assert np.allclose(hg.project_to_simplex(est).noisy_heights, est.noisy_heights)
