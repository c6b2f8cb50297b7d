"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import csv
import math
from pathlib import Path

import numpy as np
import pytest

from privdensity import basis, bounds, cli, histogram, projection
from privdensity.budget import (
    PrivacyBudget,
    draw_noise,
    gaussian_scale,
    noise_variance,
    pure_to_zcdp,
    relaxed_gaussian_scale,
    sensitivity_bruteforce,
    zcdp_to_approx,
)
from privdensity.densities import make_bump_packing, make_saw, make_triangle, sample
from privdensity.risk import EstimatorConfig, Metric, fit_rate, lower_vs_empirical, mc_risk
from privdensity.streams import make_stream

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SAW = make_saw(1.0, 3, [1, 0, 1], 0.05)
BUMPS = make_bump_packing(2.0, 1, 4, [1, 1, 1, 1], 0.15)


def _report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_1_lipschitz_rate_nonprivate(capsys):
    pts = []
    for n in [2**k for k in range(8, 15)]:
        cfg = EstimatorConfig("histogram", h=histogram.tuned_bandwidth(n, None))
        pts.append((n, mc_risk(cfg, SAW, Metric.l2(), n, 400, seed=1).risk_mean))
    slope = fit_rate(pts).slope
    _report(capsys, "1 non-private Lipschitz rate", -0.79 <= slope <= -0.55, f"slope {slope:.4f}, window [-0.79, -0.55]")


@pytest.mark.parametrize("kind", ["pure", "zcdp"])
def test_2_lipschitz_rate_high_privacy(capsys, kind):
    n = 4096
    pts = []
    for a in (0.000625, 0.00125, 0.0025, 0.005):
        assert 1 / (n * a) >= 10 * n ** (-2 / 3)
        b = PrivacyBudget.pure(a) if kind == "pure" else PrivacyBudget.zcdp(a * a)
        rep = mc_risk(EstimatorConfig("histogram", b), SAW, Metric.l2(), n, 800, seed=2)
        pts.append((n * b.effective_alpha(), rep.risk_mean))
    slope = fit_rate(pts).slope
    _report(capsys, f"2 high-privacy Lipschitz rate ({kind})", -1.2 <= slope <= -0.8, f"slope {slope:.4f}, window [-1.2, -0.8]")


def test_3_sobolev_rates(capsys):
    # n = N^3 and n sqrt(rho) = N^2 keep the tuned truncation order integral
    pts = []
    for N in (4, 5, 6, 8, 10, 12, 16):
        n = N**3
        cfg = EstimatorConfig("projection", beta=1)
        assert cfg.tuning(n) == N
        pts.append((n, mc_risk(cfg, BUMPS, Metric.l2(), n, 400, seed=3).risk_mean))
    s_classic = fit_rate(pts).slope
    n = 8192
    pts = []
    for N in (2, 3, 4, 6, 8):
        b = PrivacyBudget.zcdp((N * N / n) ** 2)
        cfg = EstimatorConfig("projection", b, beta=1)
        assert cfg.tuning(n) == N
        pts.append((n * b.effective_alpha(), mc_risk(cfg, BUMPS, Metric.l2(), n, 400, seed=4).risk_mean))
    s_private = fit_rate(pts).slope
    ok = -0.79 <= s_classic <= -0.55 and -1.2 <= s_private <= -0.8
    _report(capsys, "3 Sobolev rates", ok,
            f"slope vs n {s_classic:.4f} in [-0.79, -0.55]; slope vs n sqrt(rho) {s_private:.4f} in [-1.2, -0.8]")


def test_4_bias_bound(capsys):
    L, n, reps, x0 = 2.0, 1000, 10_000, 0.1
    f = make_triangle(L, 0.5, 0.2)
    details, ok = [], True
    for h in (0.05, 0.1, 0.2):
        rng = make_stream(int(1 / h))
        vals = np.array([histogram.fit(sample(f, n, rng), h, None, rng).eval(x0) for _ in range(reps)])
        bias = abs(vals.mean() - f.pdf(x0))
        limit = L * h / 2 + 4 * vals.std(ddof=1) / math.sqrt(reps)
        ok &= bool(bias <= limit)
        details.append(f"h={h}: |bias| {bias:.2e} <= {limit:.2e}")
    _report(capsys, "4 bias bound", ok, "; ".join(details))


def test_5_packing_inequalities(capsys, tmp_path, monkeypatch):
    cfg = CONFIGS / "verify_packing.ini"
    sec = cli.load_config(cfg, "verify-packing")["verify-packing"]
    grid = tuple(len(sec[k].split(",")) for k in ("L", "saw_fractions", "m"))
    code = cli.main(["verify-packing", "--config", str(cfg), "--out", str(tmp_path)])
    with open(tmp_path / "packing.csv", newline="") as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))[1:]
    worst = min(float(r[9]) for r in rows)
    failed = sum(r[10] != "pass" for r in rows)
    # a violation must surface as exit status 2
    bad = bounds.InequalityCheck("saw", "tv(uniform, f)", 1.0, 2, 0.1, "11", 1.0, 0.5, "<=")
    with monkeypatch.context() as mp:
        mp.setattr(bounds, "verify_packing_grid", lambda rng, **kw: [bad])
        bad_code = cli.main(["verify-packing", "--out", str(tmp_path / "bad")])
    ok = grid == (3, 3, 4) and code == 0 and failed == 0 and worst >= -1e-8 and bad_code == 2
    _report(capsys, "5 packing inequalities", ok,
            f"grid {grid}, {len(rows)} checks, {failed} failed, min slack {worst:.3e}, exit {code}, exit on violation {bad_code}")


def test_6_sensitivity(capsys):
    hist_ok = True
    for n in (1, 2, 3, 4):
        s = sensitivity_bruteforce(lambda ds: histogram.bin_counts(ds, 0.25), list(np.linspace(0, 1, 8)), n)
        hist_ok &= s.l1 == 2.0 and s.l2 == math.sqrt(2.0)
    below, best = True, (0.0, None)
    # k/32 contains the quarter points where sin(2 pi x) is extremal
    grid = list(np.arange(32) / 32)
    for N in (1, 2, 3, 4, 5, 8):
        for n in (1, 2):
            s = sensitivity_bruteforce(lambda ds: basis.basis_matrix(np.array(ds), N).sum(axis=0), grid, n)
            b1, b2 = 2 * math.sqrt(2) * N, 2 * math.sqrt(2) * math.sqrt(N)
            below &= s.l1 <= b1 + 1e-12 and s.l2 <= b2 + 1e-12
            if s.l2 / b2 > best[0]:
                best = (s.l2 / b2, N)
    ok = hist_ok and below and best[0] >= 0.9
    _report(capsys, "6 sensitivity", ok,
            f"histogram exact (2, sqrt 2): {hist_ok}; projection within (2 sqrt2 N, 2 sqrt2 sqrt N): {below}; "
            f"best l2 fraction {best[0]:.4f} at N={best[1]}, required >= 0.9")


def test_7_mechanism_calibration(capsys):
    rng = make_stream(7)
    details, ok = [], True
    cases = [
        ("laplace hist", *histogram.noise_spec(PrivacyBudget.pure(0.5))),
        ("gauss hist", *histogram.noise_spec(PrivacyBudget.zcdp(0.3))),
        ("laplace proj", *projection.noise_spec(5, PrivacyBudget.pure(1.0))),
        ("gauss proj", *projection.noise_spec(5, PrivacyBudget.zcdp(0.1))),
        ("gauss relaxed", *projection.noise_spec(5, PrivacyBudget.approx(1.0, 1e-5))),
    ]
    for name, kind, scale in cases:
        x = draw_noise(kind, scale, 10**6, rng)
        rel = abs(x.var() / noise_variance(kind, scale) - 1)
        ok &= bool(rel <= 0.05)
        details.append(f"{name} {rel:.2%}")
    worst = 0.0
    for alpha in (1.5, 2.0, 10.0):
        for rho in (0.01, 0.5, 2.0):
            d2 = math.sqrt(2)
            r = bounds.renyi_gaussian(alpha, d2, gaussian_scale(d2, rho))
            worst = max(worst, abs(r - rho * alpha) / (rho * alpha))
    ok &= worst <= 4 * np.finfo(float).eps
    _report(capsys, "7 mechanism calibration", ok, f"variance errors {', '.join(details)}; renyi max rel err {worst:.1e}")


def test_8_parseval_consistency(capsys):
    rng = make_stream(8)
    worst_excess = -math.inf
    for _ in range(20):
        if rng.random() < 0.5:
            f = make_triangle(float(rng.uniform(0.5, 3)), float(rng.uniform(0.3, 0.7)), 0.2)
        else:
            m = int(rng.integers(2, 6))
            f = make_bump_packing(float(rng.uniform(0.5, 2)), int(rng.integers(1, 3)), m,
                                  rng.integers(0, 2, m) | np.eye(m, dtype=int)[0], 0.5 / (m + 1))
        N = int(rng.integers(1, 16))
        est = projection.fit(sample(f, int(rng.integers(50, 2000)), rng), N, PrivacyBudget.zcdp(float(rng.uniform(0.1, 2))), rng)
        d = projection.l2_distance(est, f)
        gap = abs(d.distance**2 - projection.quadrature_l2_sq(est, f))
        worst_excess = max(worst_excess, gap - (1e-6 + d.tail_bound))
    _report(capsys, "8 Parseval consistency", worst_excess <= 0,
            f"max of |parseval - quadrature| - (1e-6 + tail) over 20 estimates: {worst_excess:.3e}")


def test_9_lower_vs_empirical(capsys):
    cases = []
    tri = bounds.triangle_packing(1.0, 0.5, 0.1)
    saw_cube = bounds.saw_packing(1.0, 3, 0.05, bounds.hypercube(3))
    bump_cube = bounds.bump_packing(1.0, 1, 3, 0.2, bounds.hypercube(3))
    budgets = [None, PrivacyBudget.pure(0.01), PrivacyBudget.pure(1.0), PrivacyBudget.zcdp(1e-4), PrivacyBudget.zcdp(0.5)]
    for n in (100, 1000):
        for b in budgets:
            cases.append((tri, "histogram", n, b))
            cases.append((saw_cube, "histogram", n, b))
        for b in (PrivacyBudget.zcdp(1e-4), PrivacyBudget.zcdp(0.5)):
            cases.append((bump_cube, "projection", n, b))
    held, nonzero, tightest = 0, 0, 0.0
    for i, (pk, kind, n, b) in enumerate(cases):
        v = lower_vs_empirical(pk, EstimatorConfig(kind, b), n, reps=100, seed=9 + i)
        held += v.holds
        if v.bound_value > 0:
            nonzero += 1
            tightest = max(tightest, v.bound_value / v.worst_risk)
    ok = held == len(cases)
    _report(capsys, "9 lower bound vs measured risk", ok,
            f"{held}/{len(cases)} cases hold, {nonzero} with a nonzero bound, largest bound/risk ratio {tightest:.3f}")


def test_10_budget_conversions(capsys):
    checks = [pure_to_zcdp(2.0) == 2.0, zcdp_to_approx(1.0, math.exp(-1.0)) == 3.0]
    for N in (1, 4, 16):
        for eps, delta in ((1.0, 1.25 * math.exp(-2)), (0.5, 1e-5), (2.0, 1e-3)):
            z = 4 * math.sqrt(math.log(1.25 / delta)) * math.sqrt(N) / eps
            checks.append(relaxed_gaussian_scale(2 * math.sqrt(2) * math.sqrt(N), eps, delta) == z)
            checks.append(projection.noise_spec(N, PrivacyBudget.approx(eps, delta))[1] == z)
    _report(capsys, "10 budget conversions", all(checks), f"{sum(checks)}/{len(checks)} exact equalities")
