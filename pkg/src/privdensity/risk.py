"""Monte Carlo risk of the estimators and log-log rate fits.

Replication ``i`` of a run seeded with ``seed`` draws its sample and its
privacy noise from ``replication_stream(seed, i)``, so a report depends only on
(config, density, metric, n, reps, seed) and not on the number of workers.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import histogram, projection
from .bounds import BoundReport, PackingFamily, best_bound
from .budget import APPROX, PrivacyBudget
from .densities import ClassSpec, Density, PiecewiseLinearDensity, check_membership, sample
from .errors import ConfigError, DomainError
from .streams import replication_stream

KINDS = ("histogram", "projection", "projection-relaxed")
SUP_GRID_SIZE = 4096
L2_PANELS = 2048
MIN_REPS = 100


@dataclass(frozen=True)
class EstimatorConfig:
    """Which estimator to run, under which budget, with a fixed or tuned h / N."""

    kind: str
    budget: Optional[PrivacyBudget] = None
    h: Optional[float] = None
    N: Optional[int] = None
    beta: int = 1
    target: Optional[ClassSpec] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown estimator kind {self.kind!r}; expected one of {KINDS}")
        b = self.budget
        if self.kind == "histogram":
            if self.N is not None:
                raise ConfigError("N applies to projection estimators only")
            if b is not None and b.kind == APPROX:
                raise ConfigError("the histogram is calibrated for pure and zCDP budgets only")
            if self.h is not None:
                histogram.n_bins(self.h)
        else:
            if self.h is not None:
                raise ConfigError("h applies to the histogram only")
            if self.N is not None and self.N < 1:
                raise ConfigError("N must be >= 1")
            if self.beta < 1:
                raise ConfigError("beta must be >= 1")
            relaxed = b is not None and b.kind == APPROX
            if self.kind == "projection-relaxed" and not relaxed:
                raise ConfigError("projection-relaxed needs an (epsilon, delta) budget")
            if self.kind == "projection" and relaxed:
                raise ConfigError("use projection-relaxed for (epsilon, delta) budgets")

    def tuning(self, n: int):
        """The bin width or truncation order used at sample size n."""
        if self.kind == "histogram":
            return self.h if self.h is not None else histogram.tuned_bandwidth(n, self.budget)
        return self.N if self.N is not None else projection.tuned_truncation(n, self.beta, self.budget)

    def fit(self, data, rng):
        t = self.tuning(len(data))
        if self.kind == "histogram":
            return histogram.fit(data, t, self.budget, rng)
        return projection.fit(data, t, self.budget, rng)

    def noise_scale(self, n: int) -> float:
        t = self.tuning(n)
        if self.kind == "histogram":
            return histogram.noise_spec(self.budget)[1]
        return projection.noise_spec(t, self.budget)[1]


@dataclass(frozen=True)
class Metric:
    kind: str  # "pointwise" | "sup" | "L2"
    x0: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("pointwise", "sup", "L2"):
            raise ConfigError(f"unknown metric {self.kind!r}")
        if self.kind == "pointwise" and (self.x0 is None or not 0.0 <= self.x0 <= 1.0):
            raise ConfigError("the pointwise metric needs x0 in [0, 1]")

    @classmethod
    def pointwise(cls, x0):
        return cls("pointwise", float(x0))

    @classmethod
    def sup(cls):
        return cls("sup")

    @classmethod
    def l2(cls):
        return cls("L2")

    @classmethod
    def parse(cls, text: str) -> "Metric":
        t = text.strip()
        if t.lower() == "l2":
            return cls.l2()
        if t.lower() in ("sup", "sup-grid"):
            return cls.sup()
        if t.lower().startswith("pointwise@"):
            try:
                return cls.pointwise(float(t.split("@", 1)[1]))
            except ValueError as exc:
                raise ConfigError(f"bad metric {text!r}") from exc
        raise ConfigError(f"bad metric {text!r}; use L2, sup or pointwise@x0")

    @property
    def tag(self) -> str:
        if self.kind == "pointwise":
            return f"pointwise@{self.x0:g}"
        return "sup-grid" if self.kind == "sup" else "L2"


@dataclass(frozen=True)
class RiskReport:
    metric: str
    n: int
    budget: Optional[PrivacyBudget]
    risk_mean: float
    risk_stderr: float
    reps: int
    seed: int
    tuning: float = float("nan")  # h or N actually used
    tail_bound: float = 0.0  # reference mass ignored by the Parseval risk, if any

    def row(self):
        b = self.budget
        return [
            self.metric, self.n,
            "none" if b is None else b.kind,
            "" if b is None else repr(float(b.value)),
            repr(float(self.risk_mean)), repr(float(self.risk_stderr)), self.reps, self.seed,
        ]


RISK_COLUMNS = ["metric", "n", "budget_kind", "budget_value", "risk_mean", "risk_stderr", "reps", "seed"]


def write_reports(path, reports: Sequence[RiskReport], header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(RISK_COLUMNS)
        for r in reports:
            w.writerow(r.row())


def read_reports(path) -> list:
    """Rows of a RiskReport CSV as dicts (comment lines skipped)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if rows and set(RISK_COLUMNS) - set(rows[0]):
        raise ConfigError(f"{path}: missing columns {sorted(set(RISK_COLUMNS) - set(rows[0]))}")
    return rows


# ---------------------------------------------------------------------------
# per-replication errors


def _bin_integrals(density: Density, bins: int):
    """(int_b pi, int_b pi^2) for each bin, exact for piecewise linear densities."""
    edges = np.arange(bins + 1) / bins
    if isinstance(density, PiecewiseLinearDensity):
        x = np.union1d(density.x, edges)
        v = density.pdf(x)
        dx = np.diff(x)
        a, b = v[:-1], v[1:]
        seg1 = 0.5 * (a + b) * dx
        seg2 = dx * (a * a + a * b + b * b) / 3.0
        which = histogram.bin_index(0.5 * (x[:-1] + x[1:]), bins)
    else:
        # Gauss-Legendre on a fine panel grid merged with the bin edges and kinks
        x = np.union1d(np.union1d(np.linspace(0.0, 1.0, L2_PANELS + 1), edges), density.breakpoints())
        nodes, weights = np.polynomial.legendre.leggauss(8)
        lo, hi = x[:-1], x[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        vals = density.pdf(pts)
        seg1 = (vals * weights).sum(axis=1) * half
        seg2 = (vals * vals * weights).sum(axis=1) * half
        which = histogram.bin_index(mid, bins)
    i1 = np.zeros(bins)
    i2 = np.zeros(bins)
    np.add.at(i1, which, seg1)
    np.add.at(i2, which, seg2)
    return i1, i2


@dataclass
class _Task:
    config: EstimatorConfig
    density: Density
    metric: Metric
    n: int
    seed: int
    tuning: float
    truth: Optional[np.ndarray] = None  # density values at the metric points
    grid: Optional[np.ndarray] = None
    bin_i1: Optional[np.ndarray] = None
    bin_i2: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None  # reference coefficients for the Parseval risk


def _prepare(config, density, metric, n, seed) -> _Task:
    t = config.tuning(n)
    task = _Task(config, density, metric, n, seed, t)
    if metric.kind == "pointwise":
        task.grid = np.array([metric.x0])
    elif metric.kind == "sup":
        task.grid = np.linspace(0.0, 1.0, SUP_GRID_SIZE)
    if task.grid is not None:
        task.truth = density.pdf(task.grid)
    elif config.kind == "histogram":
        task.bin_i1, task.bin_i2 = _bin_integrals(density, histogram.n_bins(t))
    else:
        task.theta = np.asarray(density.coefficients(projection.reference_order(int(t))), dtype=float)
    return task


def _replication_error(task: _Task, i: int) -> float:
    rng = replication_stream(task.seed, i)
    data = sample(task.density, task.n, rng)
    est = task.config.fit(data, rng)
    if task.grid is not None:
        d = est.eval(task.grid) - task.truth
        return float(np.max(d * d))
    if task.config.kind == "histogram":
        H = est.noisy_heights
        # int (H - pi)^2 over bin b = H^2 h - 2 H int_b pi + int_b pi^2
        terms = H * H * est.h - 2.0 * H * task.bin_i1 + task.bin_i2
        return max(0.0, math.fsum(terms))
    c = est.noisy_coefficients
    N = c.size
    head = c - task.theta[:N]
    return math.fsum(np.concatenate([head * head, task.theta[N:] ** 2]))


def _run_chunk(task: _Task, indices) -> list:
    return [_replication_error(task, i) for i in indices]


def replication_errors(config, density, metric, n, reps, seed, workers: int = 1) -> np.ndarray:
    """Squared error of each replication, in replication order."""
    task = _prepare(config, density, metric, n, seed)
    idx = list(range(reps))
    if workers <= 1 or reps < 2 * workers:
        return np.array(_run_chunk(task, idx))
    chunks = [idx[k::workers] for k in range(workers)]
    out = np.empty(reps)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk, errs in zip(chunks, pool.map(_run_chunk, [task] * workers, chunks)):
            out[chunk] = errs
    return out


def mc_risk(
    config: EstimatorConfig,
    density: Density,
    metric: Metric,
    n: int,
    reps: int,
    seed: int = 0,
    *,
    workers: int = 1,
    min_reps: int = MIN_REPS,
) -> RiskReport:
    """Mean squared error (and its standard error) over ``reps`` replications."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    if reps < min_reps:
        raise ConfigError(f"reps must be >= {min_reps}")
    if config.target is not None:
        rep = check_membership(density, config.target)
        if not rep.ok:
            warnings.warn(f"density is outside the target class ({rep.quantity:g} > {rep.limit:g})", stacklevel=2)
    errs = replication_errors(config, density, metric, n, reps, seed, workers)
    mean = math.fsum(errs) / reps
    sd = math.sqrt(math.fsum((errs - mean) ** 2) / (reps - 1)) if reps > 1 else 0.0
    tail = 0.0
    if metric.kind == "L2" and config.kind != "histogram":
        order = projection.reference_order(int(config.tuning(n)))
        tb = projection._tail_bound(density, order, None)
        tail = float("nan") if tb is None else tb
    return RiskReport(metric.tag, int(n), config.budget, mean, sd / math.sqrt(reps), int(reps), int(seed),
                      float(config.tuning(n)), tail)


# ---------------------------------------------------------------------------
# rates


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple


def fit_rate(points) -> RateFit:
    """Least squares fit of ln(risk) = intercept + slope ln(x)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points")
    if any(not (x > 0 and y > 0) for x, y in pts):
        raise DomainError("all coordinates must be positive")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    if np.ptp(lx) == 0:
        raise DomainError("x values must not all be equal")
    res = stats.linregress(lx, ly)
    r2 = 1.0 if np.ptp(ly) == 0 else min(1.0, max(0.0, res.rvalue**2))
    return RateFit(float(res.slope), float(res.intercept), float(r2), tuple(pts))


# ---------------------------------------------------------------------------
# lower bound versus measured risk


@dataclass(frozen=True)
class Verdict:
    holds: bool
    bound: Optional[BoundReport]
    worst_risk: float
    worst_stderr: float
    worst_member: int
    reports: tuple = field(default=())

    @property
    def bound_value(self) -> float:
        return 0.0 if self.bound is None else self.bound.value


def lower_vs_empirical(
    packing: PackingFamily,
    estimator: EstimatorConfig,
    n: int,
    budget: Optional[PrivacyBudget] = None,
    *,
    reps: int = 200,
    seed: int = 0,
    workers: int = 1,
    z: float = 4.0,
) -> Verdict:
    """Check that the best lower bound does not exceed the worst measured L^2 risk over the packing."""
    if budget is None:
        budget = estimator.budget
    elif budget != estimator.budget:
        raise ConfigError("the bound must be evaluated at the estimator's own budget")
    bound = best_bound(packing, n, budget)
    reports = tuple(
        mc_risk(estimator, f, Metric.l2(), n, reps, seed + 7919 * k, workers=workers)
        for k, f in enumerate(packing.members)
    )
    k = int(np.argmax([r.risk_mean for r in reports]))
    worst = reports[k]
    value = 0.0 if bound is None else bound.value
    return Verdict(value <= worst.risk_mean + z * worst.risk_stderr, bound, worst.risk_mean, worst.risk_stderr, k, reports)
