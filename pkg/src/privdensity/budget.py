"""Privacy budgets, mechanism calibration and a brute-force sensitivity check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, SizeError
from .streams import uniform_open

PURE = "pure"
ZCDP = "zcdp"
APPROX = "approx"


@dataclass(frozen=True)
class PrivacyBudget:
    """An immutable privacy budget: pure eps-DP, rho-zCDP or (eps, delta)-DP.

    Use the :meth:`pure`, :meth:`zcdp` and :meth:`approx` constructors.
    """

    kind: str
    epsilon: Optional[float] = None
    rho: Optional[float] = None
    delta: float = 0.0

    def __post_init__(self):
        if self.kind == PURE:
            _positive("epsilon", self.epsilon)
            if self.rho is not None or self.delta != 0.0:
                raise DomainError("a pure budget carries only epsilon")
        elif self.kind == ZCDP:
            _positive("rho", self.rho)
            if self.epsilon is not None or self.delta != 0.0:
                raise DomainError("a zCDP budget carries only rho")
        elif self.kind == APPROX:
            _positive("epsilon", self.epsilon)
            if not 0.0 <= self.delta < 1.0:
                raise DomainError(f"delta must lie in [0, 1), got {self.delta}")
            if self.rho is not None:
                raise DomainError("an approximate budget carries epsilon and delta")
        else:
            raise DomainError(f"unknown budget kind {self.kind!r}")

    @classmethod
    def pure(cls, epsilon: float) -> "PrivacyBudget":
        return cls(PURE, epsilon=float(epsilon))

    @classmethod
    def zcdp(cls, rho: float) -> "PrivacyBudget":
        return cls(ZCDP, rho=float(rho))

    @classmethod
    def approx(cls, epsilon: float, delta: float) -> "PrivacyBudget":
        return cls(APPROX, epsilon=float(epsilon), delta=float(delta))

    def effective_alpha(self) -> float:
        """Unified privacy level: epsilon for pure DP, sqrt(rho) for zCDP.

        Undefined for approximate budgets.
        """
        if self.kind == PURE:
            return self.epsilon
        if self.kind == ZCDP:
            return math.sqrt(self.rho)
        raise DomainError("effective_alpha is only defined for pure and zCDP budgets")

    @property
    def value(self) -> float:
        """The budget's main parameter (epsilon, or rho for zCDP)."""
        return self.rho if self.kind == ZCDP else self.epsilon

    def describe(self) -> str:
        if self.kind == PURE:
            return f"pure(eps={self.epsilon:g})"
        if self.kind == ZCDP:
            return f"zcdp(rho={self.rho:g})"
        return f"approx(eps={self.epsilon:g}, delta={self.delta:g})"


@dataclass(frozen=True)
class Sensitivity:
    l1: float
    l2: float

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise DomainError("sensitivities are nonnegative")


def _positive(name, value):
    if value is None or not value > 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def laplace_scale(delta1: float, epsilon: float) -> float:
    """Laplace noise scale delta1 / epsilon for an epsilon-DP release."""
    _positive("delta1", delta1)
    _positive("epsilon", epsilon)
    return delta1 / epsilon


def gaussian_scale(delta2: float, rho: float) -> float:
    """Gaussian standard deviation delta2 / sqrt(2 rho) for a rho-zCDP release."""
    _positive("delta2", delta2)
    _positive("rho", rho)
    return delta2 / math.sqrt(2.0 * rho)


def pure_to_zcdp(epsilon: float) -> float:
    _positive("epsilon", epsilon)
    return epsilon * epsilon / 2.0


def zcdp_to_approx(rho: float, delta: float) -> float:
    """Epsilon such that a rho-zCDP mechanism is (epsilon, delta)-DP."""
    _positive("rho", rho)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def relaxed_gaussian_scale(sensitivity_l2: float, epsilon: float, delta: float) -> float:
    """Classical (epsilon, delta) Gaussian mechanism: sqrt(2 ln(1.25/delta)) * l2 / epsilon."""
    _positive("sensitivity_l2", sensitivity_l2)
    _positive("epsilon", epsilon)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(2.0 * math.log(1.25 / delta)) * sensitivity_l2 / epsilon


def laplace_noise(scale: float, size, rng: np.random.Generator) -> np.ndarray:
    """Centered Laplace draws by inverse CDF of one uniform per draw."""
    u = uniform_open(rng, size) - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def gaussian_noise(sigma: float, size, rng: np.random.Generator) -> np.ndarray:
    """Centered Gaussian draws by inverse normal CDF of uniforms."""
    return sigma * ndtri(uniform_open(rng, size))


def noise_variance(kind: str, scale: float) -> float:
    """Variance of one noise coordinate ('laplace' scale b -> 2 b^2, 'gaussian' sigma -> sigma^2)."""
    if kind == "laplace":
        return 2.0 * scale * scale
    if kind == "gaussian":
        return scale * scale
    if kind == "none":
        return 0.0
    raise DomainError(f"unknown noise kind {kind!r}")


def draw_noise(kind: str, scale: float, size, rng: np.random.Generator) -> np.ndarray:
    if kind == "laplace":
        return laplace_noise(scale, size, rng)
    if kind == "gaussian":
        return gaussian_noise(scale, size, rng)
    if kind == "none":
        return np.zeros(size)
    raise DomainError(f"unknown noise kind {kind!r}")


# Limits for the exhaustive sensitivity search.
MAX_RECORDS = 4
MAX_GRID = 32
MAX_EVALUATIONS = 2_000_000
MAX_PAIRS = 200_000_000


def sensitivity_bruteforce(
    query: Callable[[Sequence[float]], Sequence[float]],
    domain_grid: Sequence[float],
    n: int,
) -> Sensitivity:
    """Exact l1/l2 sensitivity of ``query`` over datasets drawn from ``domain_grid``.

    Every dataset in grid^n is evaluated once; neighbours differ in exactly one
    position, so for each position the datasets are grouped by their other
    coordinates and the largest difference inside each group is taken.
    """
    grid = [float(g) for g in domain_grid]
    G = len(grid)
    if n < 1 or G < 1:
        raise DomainError("need n >= 1 and a nonempty grid")
    if n > MAX_RECORDS or G > MAX_GRID:
        raise SizeError(f"exhaustive search limited to n <= {MAX_RECORDS} and |grid| <= {MAX_GRID}")
    n_datasets = G**n
    n_pairs = n * G ** (n - 1) * G * G
    if n_datasets > MAX_EVALUATIONS or n_pairs > MAX_PAIRS:
        raise SizeError(f"{n_datasets} datasets / {n_pairs} pairs exceed the enumeration budget")

    values = np.array(
        [np.atleast_1d(np.asarray(query(ds), dtype=float)) for ds in itertools.product(grid, repeat=n)]
    )
    d = values.shape[1]
    # dataset index is base-G with the first record most significant
    cube = values.reshape((G,) * n + (d,))
    best_l1 = 0.0
    best_l2 = 0.0
    for pos in range(n):
        groups = np.moveaxis(cube, pos, n - 1).reshape(-1, G, d)
        for start in range(0, groups.shape[0], max(1, 4096 // G)):
            chunk = groups[start : start + max(1, 4096 // G)]
            diff = chunk[:, :, None, :] - chunk[:, None, :, :]
            best_l1 = max(best_l1, float(np.abs(diff).sum(axis=-1).max()))
            best_l2 = max(best_l2, float(np.sqrt((diff * diff).sum(axis=-1)).max()))
    return Sensitivity(l1=best_l1, l2=best_l2)
