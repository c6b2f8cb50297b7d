"""Noisy histogram estimator on a regular grid of [0, 1].

The whole budget is spent on one release of the bin counts: changing one record
moves two counts by one, so the count vector has l1 sensitivity 2 and l2
sensitivity sqrt(2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .budget import APPROX, PURE, ZCDP, PrivacyBudget, draw_noise, gaussian_scale, laplace_scale, noise_variance
from .errors import ConfigError, DomainError, InputError

SENSITIVITY_L1 = 2.0
SENSITIVITY_L2 = math.sqrt(2.0)


def check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise InputError("empty dataset")
    bad = np.flatnonzero(~((x >= 0.0) & (x <= 1.0)))
    if bad.size:
        raise InputError(f"data point #{bad[0]} = {x[bad[0]]!r} lies outside [0, 1]")
    return x


def n_bins(h: float) -> int:
    """Number of bins for width h; 1/h must be an integer."""
    if not 0.0 < h <= 1.0:
        raise DomainError(f"bin width must lie in (0, 1], got {h}")
    b = round(1.0 / h)
    if abs(b * h - 1.0) > 1e-9:
        raise DomainError(f"1/h must be an integer, got 1/{h} = {1.0 / h}")
    return b


def bin_index(x, bins: int) -> np.ndarray:
    """Bins are [k/B, (k+1)/B) with the last one closed at 1."""
    return np.minimum((np.asarray(x, dtype=float) * bins).astype(int), bins - 1)


def bin_counts(data, h: float) -> np.ndarray:
    bins = n_bins(h)
    return np.bincount(bin_index(check_data(data), bins), minlength=bins).astype(float)


def noise_spec(budget: Optional[PrivacyBudget]) -> tuple:
    """(noise kind, scale) added to each bin count."""
    if budget is None:
        return "none", 0.0
    if budget.kind == PURE:
        return "laplace", laplace_scale(SENSITIVITY_L1, budget.epsilon)
    if budget.kind == ZCDP:
        return "gaussian", gaussian_scale(SENSITIVITY_L2, budget.rho)
    raise ConfigError("histograms are calibrated for pure and zCDP budgets only")


def tuned_bandwidth(n: int, budget: Optional[PrivacyBudget]) -> float:
    """max(n^{-1/3}, (n alpha)^{-1/2}), rounded down to the nearest 1/integer and capped at 1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    raw = n ** (-1.0 / 3.0)
    if budget is not None:
        if budget.kind == APPROX:
            raise ConfigError("no bandwidth rule for approximate budgets")
        raw = max(raw, (n * budget.effective_alpha()) ** -0.5)
    # the tolerance keeps e.g. 1000^{-1/3} = 0.1000...02 from becoming 1/11
    bins = max(1, math.ceil(1.0 / raw - 1e-9))
    return 1.0 / bins


@dataclass(frozen=True)
class HistogramEstimate:
    h: float
    noisy_heights: np.ndarray
    n: int
    budget: Optional[PrivacyBudget]

    @property
    def bins(self) -> int:
        return self.noisy_heights.size

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.bins + 1) / self.bins

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~((x >= 0.0) & (x <= 1.0))):
            raise InputError("evaluation points must lie in [0, 1]")
        return self.noisy_heights[bin_index(x, self.bins)]

    __call__ = eval

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "height"])
            e = self.edges
            for k, v in enumerate(self.noisy_heights):
                w.writerow([repr(float(e[k])), repr(float(e[k + 1])), repr(float(v))])


def fit(data, h: float, budget: Optional[PrivacyBudget], rng: np.random.Generator) -> HistogramEstimate:
    """Heights (count_b + Z_b) / (n h) with i.i.d. noise calibrated to ``budget``."""
    x = check_data(data)
    counts = bin_counts(x, h)
    kind, scale = noise_spec(budget)
    bins = counts.size
    noisy = counts + draw_noise(kind, scale, bins, rng)
    heights = noisy * bins / x.size
    heights.setflags(write=False)
    return HistogramEstimate(h=1.0 / bins, noisy_heights=heights, n=int(x.size), budget=budget)


def eval(estimate: HistogramEstimate, x):  # noqa: A001 - mirrors the estimator vocabulary
    return estimate.eval(x)


def height_noise_variance(n: int, h: float, budget: Optional[PrivacyBudget]) -> float:
    """Variance that the privacy noise adds to each height: Var(Z) / (n h)^2."""
    kind, scale = noise_spec(budget)
    return noise_variance(kind, scale) / (n * h) ** 2


def project_to_simplex(estimate: HistogramEstimate) -> HistogramEstimate:
    """Closest (in l2) histogram with nonnegative heights integrating to one.

    Optional post-processing; risk experiments use the raw estimate.
    """
    b = estimate.bins
    mass = estimate.noisy_heights / b
    # Euclidean projection onto the probability simplex (sort-and-threshold)
    u = np.sort(mass)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, b + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    tau = css[r] / (r + 1)
    heights = np.maximum(mass - tau, 0.0) * b
    heights.setflags(write=False)
    return HistogramEstimate(h=estimate.h, noisy_heights=heights, n=estimate.n, budget=estimate.budget)
