"""Noisy projection estimator on the trigonometric basis.

Each released coefficient is the empirical mean of phi_i plus independent noise
of scale Z_i / n. Since |phi_i| <= sqrt(2), changing one record moves the
coefficient vector (times n) by at most 2 sqrt(2) per coordinate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import basis
from .budget import APPROX, PURE, ZCDP, PrivacyBudget, draw_noise, noise_variance
from .densities import Density, FourierSeries
from .errors import DomainError, InputError
from .histogram import check_data


def noise_spec(N: int, budget: Optional[PrivacyBudget]) -> tuple:
    """(noise kind, scale of Z_i) for a release of N coefficients."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if budget is None:
        return "none", 0.0
    if budget.kind == PURE:
        return "laplace", 2.0 * math.sqrt(2.0) * N / budget.epsilon
    if budget.kind == ZCDP:
        return "gaussian", 2.0 * math.sqrt(N) / math.sqrt(budget.rho)
    if budget.kind == APPROX:
        if not 0.0 < budget.delta < 1.0:
            raise DomainError("the relaxed Gaussian release needs delta in (0, 1)")
        return "gaussian", 4.0 * math.sqrt(math.log(1.25 / budget.delta)) * math.sqrt(N) / budget.epsilon
    raise DomainError(f"unknown budget kind {budget.kind!r}")


def tuned_truncation(n: int, beta: int, budget: Optional[PrivacyBudget]) -> int:
    """Nearest integer (at least 1) to min(n^{1/(2 beta + 1)}, private term)."""
    if n < 1 or beta < 1:
        raise DomainError("need n >= 1 and beta >= 1")
    raw = n ** (1.0 / (2 * beta + 1))
    if budget is not None:
        if budget.kind == PURE:
            raw = min(raw, (n * budget.epsilon) ** (1.0 / (beta + 1.5)))
        elif budget.kind == ZCDP:
            raw = min(raw, (n * math.sqrt(budget.rho)) ** (1.0 / (beta + 1)))
        else:
            if not 0.0 < budget.delta < 1.0:
                raise DomainError("the relaxed Gaussian release needs delta in (0, 1)")
            raw = min(raw, (n * budget.epsilon / math.sqrt(math.log(1.25 / budget.delta))) ** (1.0 / (beta + 1)))
    return max(1, int(math.floor(raw + 0.5)))


def relaxed_budget(n: int, epsilon: float, gamma: float) -> tuple:
    """Pair (rho, delta) with delta = n^{-gamma} and rho = eps^2 / (16 ln(n^gamma)).

    Running the Gaussian release at that rho gives (eps, delta)-DP as long as
    eps <= 8 ln(n^gamma).
    """
    if n < 2 or not gamma > 0 or not epsilon > 0:
        raise DomainError("need n >= 2, gamma > 0 and epsilon > 0")
    log_term = gamma * math.log(n)
    if epsilon > 8.0 * log_term:
        raise DomainError("epsilon must not exceed 8 gamma ln n")
    return epsilon**2 / (16.0 * log_term), n ** (-gamma)


@dataclass(frozen=True)
class ProjectionEstimate:
    noisy_coefficients: np.ndarray
    n: int
    budget: Optional[PrivacyBudget]

    @property
    def N(self) -> int:
        return self.noisy_coefficients.size

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~((x >= 0.0) & (x <= 1.0))):
            raise InputError("evaluation points must lie in [0, 1]")
        return basis.evaluate_series(self.noisy_coefficients, x.ravel()).reshape(x.shape)

    __call__ = eval

    def as_series(self) -> FourierSeries:
        return FourierSeries(self.noisy_coefficients)

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["index", "coefficient"])
            for i, c in enumerate(self.noisy_coefficients, start=1):
                w.writerow([i, repr(float(c))])


def empirical_coefficients(data, N: int) -> np.ndarray:
    x = check_data(data)
    return basis.basis_matrix(x, N).mean(axis=0)


def fit(data, N: int, budget: Optional[PrivacyBudget], rng: np.random.Generator) -> ProjectionEstimate:
    """theta_hat_i + Z_i / n for i = 1..N."""
    x = check_data(data)
    kind, scale = noise_spec(N, budget)
    coef = empirical_coefficients(x, N) + draw_noise(kind, scale, N, rng) / x.size
    coef.setflags(write=False)
    return ProjectionEstimate(noisy_coefficients=coef, n=int(x.size), budget=budget)


def eval(estimate: ProjectionEstimate, x):  # noqa: A001
    return estimate.eval(x)


def coefficient_noise_variance(n: int, N: int, budget: Optional[PrivacyBudget]) -> float:
    kind, scale = noise_spec(N, budget)
    return noise_variance(kind, scale) / n**2


def reference_order(N: int) -> int:
    return max(4 * N, 64)


@dataclass(frozen=True)
class L2Distance:
    distance: float
    order: int  # reference coefficients used
    tail_bound: Optional[float]  # bound on the squared reference mass beyond ``order``

    def __float__(self):
        return self.distance


def l2_distance(estimate, reference, order: Optional[int] = None, *, sobolev: Optional[tuple] = None) -> L2Distance:
    """Coefficient-space L^2 distance sqrt(sum_{i<=N}(c_i - theta_i)^2 + sum_{N<i<=N'} theta_i^2).

    ``reference`` is a FourierSeries, a Density or a coefficient array. The
    squared mass beyond N' is bounded, when possible, by the reference's
    Sobolev energy (exact for known densities, or ``sobolev=(L, beta)`` for a
    class bound) divided by (pi a_{N'+1})^{2 beta}.
    """
    c = np.asarray(estimate.noisy_coefficients if isinstance(estimate, ProjectionEstimate) else estimate, float)
    N = c.size
    order = reference_order(N) if order is None else max(int(order), N)
    if isinstance(reference, Density):
        theta = np.asarray(reference.coefficients(order), dtype=float)
        exact_tail = isinstance(reference, FourierSeries) and reference.N <= order
    else:
        theta = np.zeros(order)
        r = np.asarray(reference, dtype=float).ravel()
        theta[: min(order, r.size)] = r[:order]
        # an explicit class bound marks the array as a truncated reference
        exact_tail = r.size <= order and sobolev is None
        reference = None
    head = c - theta[:N]
    sq = math.fsum(np.concatenate([head * head, theta[N:] ** 2]))
    tail = 0.0 if exact_tail else _tail_bound(reference, order, sobolev)
    return L2Distance(math.sqrt(sq), order, tail)


def _tail_bound(reference, order, sobolev):
    a_next = float(basis.ellipsoid_weights(order + 1)[-1])
    if reference is not None:
        for beta in (2, 1):
            e = reference.sobolev_energy(beta)
            if e is not None and math.isfinite(e):
                return e / (np.pi * a_next) ** (2 * beta)
    if sobolev is not None:
        L, beta = sobolev
        return L**2 / (np.pi * a_next) ** (2 * beta)
    return None


def quadrature_l2_sq(estimate, density: Density, tol: float = 1e-11) -> float:
    """Direct adaptive quadrature of int (estimate - density)^2 over [0, 1]."""
    c = np.asarray(estimate.noisy_coefficients if isinstance(estimate, ProjectionEstimate) else estimate, float)
    bp = density.breakpoints()

    def sq(x):
        d = basis.evaluate_series(c, [x])[0] - float(density.pdf(x))
        return d * d

    # oscillations of the series need more subdivisions at high N
    limit = max(200, 8 * c.size)
    return math.fsum(integrate.quad(sq, a, b, epsabs=tol, epsrel=1e-12, limit=limit)[0] for a, b in zip(bp[:-1], bp[1:]))
