import math

import numpy as np
import pytest

from privdensity import bounds as bd
from privdensity import histogram as hg
from privdensity import projection as pj
from privdensity.budget import PrivacyBudget
from privdensity.densities import ClassSpec, FourierSeries, Uniform, make_bump_packing, make_saw, make_triangle, sample
from privdensity.errors import ConfigError, DomainError
from privdensity.risk import (
    EstimatorConfig,
    Metric,
    RiskReport,
    fit_rate,
    lower_vs_empirical,
    mc_risk,
    read_reports,
    replication_errors,
    write_reports,
)
from privdensity.streams import make_stream, replication_stream


def test_projection_n1_uniform_zero_risk():
    rep = mc_risk(EstimatorConfig("projection", N=1), Uniform(), Metric.l2(), 50, 100)
    assert rep.risk_mean == 0.0
    assert rep.risk_stderr == 0.0


def test_histogram_uniform_pointwise():
    n, h = 10**4, 0.1
    rep = mc_risk(EstimatorConfig("histogram", h=h), Uniform(), Metric.pointwise(0.55), n, 400, seed=1)
    assert rep.risk_mean <= 1 / (n * h) + 4 * rep.risk_stderr


def test_reproducible_bitwise():
    cfg = EstimatorConfig("histogram", PrivacyBudget.pure(1.0))
    f = make_triangle(1.0, 0.5, 0.2)
    a = mc_risk(cfg, f, Metric.l2(), 500, 120, seed=42)
    b = mc_risk(cfg, f, Metric.l2(), 500, 120, seed=42)
    assert a == b
    c = mc_risk(cfg, f, Metric.l2(), 500, 120, seed=43)
    assert c.risk_mean != a.risk_mean


def test_worker_count_does_not_matter():
    cfg = EstimatorConfig("projection", PrivacyBudget.zcdp(0.5), N=4)
    f = make_bump_packing(1.0, 1, 3, [1, 0, 1], 0.2)
    one = replication_errors(cfg, f, Metric.l2(), 200, 30, 7, workers=1)
    two = replication_errors(cfg, f, Metric.l2(), 200, 30, 7, workers=2)
    assert np.array_equal(one, two)


def test_stderr_shrinks_with_doubled_reps():
    cfg = EstimatorConfig("histogram", h=0.1)
    f = make_triangle(2.0, 0.5, 0.2)
    ratios = []
    for s in range(10):
        small = mc_risk(cfg, f, Metric.l2(), 200, 200, seed=s)
        big = mc_risk(cfg, f, Metric.l2(), 200, 400, seed=1000 + s)
        ratios.append(big.risk_stderr / small.risk_stderr)
    assert np.mean(ratios) == pytest.approx(1 / math.sqrt(2), rel=0.2)


@pytest.mark.parametrize(
    "density",
    [make_triangle(2.0, 0.4, 0.2), make_bump_packing(2.0, 1, 4, [1, 1, 0, 1], 0.15)],
    ids=["triangle", "bump"],
)
def test_projection_parseval_risk_matches_quadrature(density):
    cfg = EstimatorConfig("projection", PrivacyBudget.zcdp(1.0), N=6)
    n, seed = 300, 5
    errs = replication_errors(cfg, density, Metric.l2(), n, 5, seed)
    tail = pj.l2_distance(np.ones(6), density).tail_bound
    for i, e in enumerate(errs):
        rng = replication_stream(seed, i)
        est = cfg.fit(sample(density, n, rng), rng)
        assert abs(e - pj.quadrature_l2_sq(est, density)) <= 1e-6 + tail


@pytest.mark.parametrize(
    "density",
    [make_saw(1.0, 3, [1, 0, 1], 0.05), make_bump_packing(2.0, 1, 4, [1, 1, 0, 1], 0.15), FourierSeries([1.0, 0.2])],
    ids=["saw", "bump", "series"],
)
def test_histogram_l2_risk_matches_quadrature(density):
    from scipy import integrate

    cfg = EstimatorConfig("histogram", PrivacyBudget.pure(2.0), h=0.1)
    n, seed = 300, 3
    errs = replication_errors(cfg, density, Metric.l2(), n, 3, seed)
    pts = np.union1d(np.linspace(0, 1, 11), density.breakpoints())
    for i, e in enumerate(errs):
        rng = replication_stream(seed, i)
        est = cfg.fit(sample(density, n, rng), rng)
        sq = lambda x: float(est.eval(x) - density.pdf(x)) ** 2  # noqa: E731
        ref = sum(integrate.quad(sq, a, b, epsabs=1e-13, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
        assert e == pytest.approx(ref, abs=1e-9)


def test_sup_metric_dominates_pointwise():
    cfg = EstimatorConfig("histogram", h=0.1)
    f = make_triangle(1.0, 0.5, 0.2)
    sup = replication_errors(cfg, f, Metric.sup(), 300, 20, 1)
    pt = replication_errors(cfg, f, Metric.pointwise(0.33), 300, 20, 1)
    assert np.all(sup >= pt)


def test_tuning_recorded():
    rep = mc_risk(EstimatorConfig("histogram"), Uniform(), Metric.l2(), 1000, 100)
    assert rep.tuning == pytest.approx(0.1)
    rep = mc_risk(EstimatorConfig("projection", beta=1), make_triangle(1, 0.5, 0.2), Metric.l2(), 1000, 100)
    assert rep.tuning == 10
    assert rep.tail_bound > 0


def test_mc_risk_validation():
    cfg = EstimatorConfig("histogram", h=0.5)
    with pytest.raises(ConfigError):
        mc_risk(cfg, Uniform(), Metric.l2(), 100, 99)
    with pytest.raises(ConfigError):
        mc_risk(cfg, Uniform(), Metric.l2(), 0, 100)


def test_membership_warning():
    cfg = EstimatorConfig("histogram", h=0.5, target=ClassSpec.lipschitz(0.5))
    with pytest.warns(UserWarning, match="outside the target class"):
        mc_risk(cfg, make_triangle(1.0, 0.5, 0.2), Metric.l2(), 50, 100)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "kde"},
        {"kind": "histogram", "N": 3},
        {"kind": "histogram", "h": 0.3},
        {"kind": "histogram", "budget": PrivacyBudget.approx(1.0, 1e-3)},
        {"kind": "projection", "h": 0.1},
        {"kind": "projection", "N": 0},
        {"kind": "projection", "beta": 0},
        {"kind": "projection", "budget": PrivacyBudget.approx(1.0, 1e-3)},
        {"kind": "projection-relaxed", "budget": PrivacyBudget.pure(1.0)},
    ],
)
def test_estimator_config_validation(kwargs):
    with pytest.raises((ConfigError, DomainError)):
        EstimatorConfig(**kwargs)


@pytest.mark.parametrize("text,tag", [("L2", "L2"), ("sup", "sup-grid"), ("pointwise@0.25", "pointwise@0.25")])
def test_metric_parse(text, tag):
    assert Metric.parse(text).tag == tag


@pytest.mark.parametrize("text", ["L1", "pointwise@x", "pointwise@2"])
def test_metric_parse_errors(text):
    with pytest.raises(ConfigError):
        Metric.parse(text)


def test_reports_roundtrip(tmp_path):
    r = RiskReport("L2", 100, PrivacyBudget.zcdp(0.5), 0.01, 0.001, 200, 3)
    p = tmp_path / "r.csv"
    write_reports(p, [r], ["seed = 3"])
    assert p.read_text().startswith("# seed = 3\nmetric,n,budget_kind,budget_value,risk_mean,risk_stderr,reps,seed\n")
    rows = read_reports(p)
    assert rows[0]["budget_kind"] == "zcdp"
    assert float(rows[0]["risk_mean"]) == 0.01


# ---------------------------------------------------------------------------
# rate fits


@pytest.mark.parametrize("slope,c", [(-2 / 3, 3.0), (-1.0, 0.5), (0.5, 1.0)])
def test_fit_rate_exact(slope, c):
    xs = [2.0**k for k in range(8, 15)]
    fit = fit_rate([(x, c * x**slope) for x in xs])
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(c), abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_rate_jittered():
    rng = make_stream(2024)
    xs = np.geomspace(100, 1e5, 8)
    ys = 2.0 * xs ** (-2 / 3) * (1 + rng.uniform(-0.05, 0.05, xs.size))
    assert fit_rate(zip(xs, ys)).slope == pytest.approx(-2 / 3, abs=0.1)


@pytest.mark.parametrize("pts", [[(1, 1), (2, 2)], [(1, 1), (2, 0), (3, 1)], [(1, 1), (-2, 2), (3, 1)], [(2, 1), (2, 2), (2, 3)]])
def test_fit_rate_errors(pts):
    with pytest.raises(DomainError):
        fit_rate(pts)


# ---------------------------------------------------------------------------
# lower bound versus measured risk


def test_lower_vs_empirical_triangle_pure():
    pk = bd.triangle_packing(1.0, 0.5, 0.1)
    budget = PrivacyBudget.pure(0.5)
    v = lower_vs_empirical(pk, EstimatorConfig("histogram", budget), 1000, budget, reps=200)
    assert v.holds
    assert v.bound.bound_kind == "lecam"
    assert v.bound_value > 0


def test_lower_vs_empirical_degenerate():
    pk = bd.make_packing([Uniform(), Uniform()])
    v = lower_vs_empirical(pk, EstimatorConfig("histogram"), 100, reps=100)
    assert v.holds and v.bound_value == 0.0


def test_lower_vs_empirical_clamped():
    pk = bd.triangle_packing(1.0, 0.5, 0.2)
    budget = PrivacyBudget.zcdp(1.0)
    v = lower_vs_empirical(pk, EstimatorConfig("histogram", budget), 10**4, reps=100)
    assert v.bound_value == 0.0 and v.holds


def test_lower_vs_empirical_budget_mismatch():
    pk = bd.triangle_packing(1.0, 0.5, 0.1)
    with pytest.raises(ConfigError):
        lower_vs_empirical(pk, EstimatorConfig("histogram"), 100, PrivacyBudget.pure(1.0), reps=100)


def test_noise_scale():
    cfg = EstimatorConfig("histogram", PrivacyBudget.pure(0.5))
    assert cfg.noise_scale(100) == hg.noise_spec(PrivacyBudget.pure(0.5))[1]
    cfg = EstimatorConfig("projection", PrivacyBudget.zcdp(1.0), N=4)
    assert cfg.noise_scale(100) == pytest.approx(4.0)
