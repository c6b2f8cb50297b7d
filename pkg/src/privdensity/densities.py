"""Test densities on [0, 1].

Three concrete families are provided:

* :class:`PiecewiseLinearDensity` (with :class:`Uniform` as a special case),
  covering single triangles (:func:`make_triangle`) and multi-triangle saws
  (:func:`make_saw`);
* :class:`SmoothBumpPacking`, the uniform density perturbed by compactly
  supported C-infinity bumps (:func:`make_bump_packing`);
* :class:`FourierSeries`, a finite trigonometric expansion.

Every density can be evaluated, integrated exactly or by quadrature, sampled,
and projected on the trigonometric basis.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from . import basis
from .errors import ConstructionError, DomainError
from .streams import uniform_open

QUAD_TOL = 1e-10


class Density:
    """Interface shared by all test densities."""

    label = "density"

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return self.pdf(x)

    def breakpoints(self) -> np.ndarray:
        """Sorted points of [0, 1] (endpoints included) where the density is not smooth."""
        return np.array([0.0, 1.0])

    def upper_bound(self) -> float:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _rejection_sample(self, n, rng)

    def coefficients(self, N: int) -> np.ndarray:
        return quad_coefficients(self, N)

    def sobolev_energy(self, order: int) -> Optional[float]:
        """Integral of the squared ``order``-th derivative, or None when unknown."""
        return None

    def lipschitz_constant(self) -> Optional[float]:
        return None

    def params(self) -> dict:
        return {}


# ---------------------------------------------------------------------------
# piecewise linear densities


class PiecewiseLinearDensity(Density):
    """Continuous density, linear between ``breakpoints`` (which start at 0 and end at 1)."""

    label = "piecewise-linear"

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float], *, meta: Optional[dict] = None):
        x = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ConstructionError("breakpoints and values must be 1-d arrays of equal length >= 2")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ConstructionError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(x) <= 0):
            raise ConstructionError("breakpoints must be strictly increasing")
        if np.any(v < 0):
            raise ConstructionError("density values must be nonnegative")
        total = float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(x)))
        if abs(total - 1.0) > 1e-12:
            raise ConstructionError(f"density integrates to {total!r}, not 1")
        self.x = x
        self.v = v
        self.meta = dict(meta or {})
        self._cdf_knots = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(x))])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.v) / np.diff(self.x)

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.v)

    def breakpoints(self):
        return self.x.copy()

    def upper_bound(self):
        return float(self.v.max())

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        k = np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, self.x.size - 2)
        t = x - self.x[k]
        return self._cdf_knots[k] + self.v[k] * t + 0.5 * self.slopes[k] * t * t

    def sample(self, n, rng):
        """Exact inverse-CDF sampling; the CDF is quadratic on each segment."""
        if n == 0:
            return np.empty(0)
        u = uniform_open(rng, n) * self._cdf_knots[-1]
        k = np.clip(np.searchsorted(self._cdf_knots, u, side="right") - 1, 0, self.x.size - 2)
        r = u - self._cdf_knots[k]
        b = self.v[k]
        s = self.slopes[k]
        # root of s t^2 / 2 + b t - r = 0, written to stay stable when s ~ 0
        disc = np.maximum(b * b + 2.0 * s * r, 0.0)
        denom = b + np.sqrt(disc)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return np.clip(self.x[k] + t, self.x[k], self.x[k + 1])

    def coefficients(self, N):
        """Closed-form Fourier coefficients (integrals of linear times exponential)."""
        theta = np.empty(N)
        theta[0] = self._cdf_knots[-1]
        if N == 1:
            return theta
        K = N // 2
        w = 2.0 * np.pi * np.arange(1, K + 1)
        a, b = self.x[:-1], self.x[1:]
        va, vb, s = self.v[:-1], self.v[1:], self.slopes
        # int_a^b f e^{iwx} dx = [f e^{iwx}/(iw) + s e^{iwx}/w^2]_a^b
        ea = np.exp(1j * np.outer(w, a))
        eb = np.exp(1j * np.outer(w, b))
        wc = w[:, None]
        z = (vb * eb - va * ea) / (1j * wc) + s * (eb - ea) / (wc * wc)
        z = z.sum(axis=1)
        theta[1 : 2 * K : 2] = basis.SQRT2 * z.imag
        n_cos = (N - 1) // 2
        theta[2 : 2 + 2 * n_cos : 2] = basis.SQRT2 * z.real[:n_cos]
        return theta

    def sobolev_energy(self, order):
        s = self.slopes
        if order == 0:
            return l2_norm_sq_piecewise(self.x, self.v)
        if np.allclose(s, 0.0, atol=0.0):
            return 0.0
        if order == 1 and self.v[0] == self.v[-1]:
            return float(np.sum(s * s * np.diff(self.x)))
        # kinks make higher derivatives singular; a mismatch at the ends breaks periodicity
        return math.inf

    def lipschitz_constant(self):
        return float(np.max(np.abs(self.slopes)))

    def params(self):
        return dict(self.meta)


class Uniform(PiecewiseLinearDensity):
    label = "uniform"

    def __init__(self):
        super().__init__([0.0, 1.0], [1.0, 1.0], meta={"family": "uniform"})

    def sample(self, n, rng):
        return rng.random(n)

    def coefficients(self, N):
        theta = np.zeros(N)
        theta[0] = 1.0
        return theta


def l2_norm_sq_piecewise(x, v) -> float:
    """Exact integral of the square of a piecewise linear function."""
    dx = np.diff(x)
    a, b = v[:-1], v[1:]
    return float(np.sum(dx * (a * a + a * b + b * b) / 3.0))


def make_triangle(L: float, x0: float, h: float) -> PiecewiseLinearDensity:
    """Uniform density lowered to 1 - L h^2 with a slope-L spike of half-width h at x0."""
    if not (L > 0 and h > 0 and 0 < x0 < 1):
        raise ConstructionError("need L > 0, h > 0 and x0 in (0, 1)")
    if h > min(x0, 1.0 - x0):
        raise ConstructionError(f"h={h} exceeds min(x0, 1 - x0)={min(x0, 1 - x0)}")
    if L * h * h > 1.0:
        raise ConstructionError("L h^2 must not exceed 1")
    base = 1.0 - L * h * h
    xs = [0.0, x0 - h, x0, x0 + h, 1.0]
    vs = [base, base, base + L * h, base, base]
    xs, vs = _dedupe(xs, vs)
    return PiecewiseLinearDensity(xs, vs, meta={"family": "triangle", "L": L, "x0": x0, "h": h})


def slot_centers(m: int) -> np.ndarray:
    return np.arange(1, m + 1) / (m + 1)


def _as_omega(omega, m=None) -> np.ndarray:
    w = np.asarray(omega, dtype=int).ravel()
    if m is not None and w.size != m:
        raise ConstructionError(f"omega must have length m={m}, got {w.size}")
    if np.any((w != 0) & (w != 1)):
        raise ConstructionError("omega must be a 0/1 vector")
    return w


def make_saw(L: float, m: int, omega, h: float) -> PiecewiseLinearDensity:
    """Triangles of slope +-L and half-width h at the active slots i/(m+1).

    Off the active slots the density equals 1 - |omega| L h^2, so it integrates to 1.
    """
    w = _as_omega(omega, m)
    k = int(w.sum())
    if k == 0:
        raise ConstructionError("omega must have at least one active slot")
    if not (L > 0 and h > 0):
        raise ConstructionError("need L > 0 and h > 0")
    if h > 1.0 / (2 * (m + 1)) + 1e-15:
        raise ConstructionError(f"h={h} exceeds 1/(2(m+1))={1 / (2 * (m + 1))}")
    if k * L * h * h >= 1.0:
        raise ConstructionError("|omega| L h^2 must be < 1")
    base = 1.0 - k * L * h * h
    xs, vs = [0.0], [base]
    for c in slot_centers(m)[w == 1]:
        xs += [c - h, c, c + h]
        vs += [base, base + L * h, base]
    xs.append(1.0)
    vs.append(base)
    xs, vs = _dedupe(xs, vs)
    return PiecewiseLinearDensity(
        xs, vs, meta={"family": "saw", "L": L, "m": m, "h": h, "omega": "".join(map(str, w))}
    )


def _dedupe(xs, vs):
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    keep = np.concatenate([[True], np.diff(xs) > 1e-15])
    return xs[keep], vs[keep]


# ---------------------------------------------------------------------------
# the C-infinity bump kernel


def kernel0(x) -> np.ndarray:
    """exp(-1 / (1 - x^2)) on (-1, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


@functools.lru_cache(maxsize=None)
def _derivative_numerator(order: int) -> Polynomial:
    """R_i with kernel0^{(i)}(x) = kernel0(x) R_i(x) / (1 - x^2)^{2i}.

    Differentiating gives R_{i+1} = -2x R_i + (1 - x^2)^2 R_i' + 4 i x (1 - x^2) R_i.
    """
    r = Polynomial([1.0])
    x = Polynomial([0.0, 1.0])
    q = Polynomial([1.0, 0.0, -1.0])
    for i in range(order):
        r = -2.0 * x * r + q * q * r.deriv() + 4.0 * i * x * q * r
    return r


def kernel0_derivative(x, order: int) -> np.ndarray:
    if order == 0:
        return kernel0(x)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    q = 1.0 - xi * xi
    # combine in log space: the exponential beats the pole at +-1
    out[inside] = np.exp(-1.0 / q - 2.0 * order * np.log(q)) * _derivative_numerator(order)(xi)
    return out


def _quad_sym(fn) -> float:
    """Integral over (-1, 1) of an even or odd smooth function, split at 0."""
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    return integrate.quad(fn, -1.0, 0.0, **opts)[0] + integrate.quad(fn, 0.0, 1.0, **opts)[0]


@functools.lru_cache(maxsize=None)
def normalize_kernel(beta: int) -> float:
    """Largest nu with int (K^{(beta)})^2 <= 1, where K(x) = nu kernel0(2x).

    int (K^{(beta)})^2 = nu^2 4^beta / 2 * int_{-1}^{1} (kernel0^{(beta)})^2.
    """
    if beta < 1:
        raise DomainError("beta must be a positive integer")
    energy = _quad_sym(lambda y: float(kernel0_derivative(y, beta)) ** 2)
    nu = 1.0 / math.sqrt(4.0**beta / 2.0 * energy)
    # shade down so the returned nu never overshoots the constraint through rounding
    return nu * (1.0 - 1e-10)


def kernel(u, beta: int) -> np.ndarray:
    """K(u) = nu_beta kernel0(2u), supported on (-1/2, 1/2)."""
    return normalize_kernel(beta) * kernel0(2.0 * np.asarray(u, dtype=float))


def kernel_derivative(u, order: int, beta: int) -> np.ndarray:
    return normalize_kernel(beta) * 2.0**order * kernel0_derivative(2.0 * np.asarray(u, dtype=float), order)


@dataclass(frozen=True)
class KernelIntegrals:
    nu: float
    integral: float  # int K
    integral_sq: float  # int K^2
    derivative_energy: float  # int (K^{(beta)})^2
    next_derivative_energy: float  # int (K^{(beta+1)})^2
    peak: float  # K(0) = nu / e
    max_slope: float  # max |K'|


@functools.lru_cache(maxsize=None)
def kernel_integrals(beta: int) -> KernelIntegrals:
    nu = normalize_kernel(beta)
    int_k0 = _quad_sym(lambda y: float(kernel0(y)))
    int_k0sq = _quad_sym(lambda y: float(kernel0(y)) ** 2)

    def energy(order):
        return nu * nu * 4.0**order / 2.0 * _quad_sym(lambda y: float(kernel0_derivative(y, order)) ** 2)

    res = optimize.minimize_scalar(
        lambda y: -abs(float(kernel0_derivative(y, 1))), bounds=(0.0, 1.0), method="bounded",
        options={"xatol": 1e-12},
    )
    return KernelIntegrals(
        nu=nu,
        integral=nu * int_k0 / 2.0,
        integral_sq=nu * nu * int_k0sq / 2.0,
        derivative_energy=energy(beta),
        next_derivative_energy=energy(beta + 1),
        peak=nu * math.exp(-1.0),
        max_slope=float(2.0 * nu * (-res.fun)),
    )


@functools.lru_cache(maxsize=4096)
def kernel_cosine_transform(w: float, beta: int) -> float:
    """int K(u) cos(w u) du over (-1/2, 1/2)."""
    nu = normalize_kernel(beta)
    if w == 0.0:
        return kernel_integrals(beta).integral
    opts = dict(weight="cos", wvar=w, epsabs=1e-14, epsrel=1e-12, limit=400)
    f = lambda u: nu * float(kernel0(2.0 * u))  # noqa: E731
    return 2.0 * integrate.quad(f, 0.0, 0.5, **opts)[0]


class SmoothBumpPacking(Density):
    """1 - |omega| L h^{beta+1} int K + L h^beta sum_i omega_i K((x - i/(m+1)) / h)."""

    label = "bump"

    def __init__(self, L: float, beta: int, m: int, omega, h: float):
        w = _as_omega(omega, m)
        if not (L > 0 and h > 0 and beta >= 1 and m >= 1):
            raise ConstructionError("need L > 0, h > 0, beta >= 1, m >= 1")
        if w.sum() == 0:
            raise ConstructionError("omega must have at least one active slot (use Uniform otherwise)")
        ki = kernel_integrals(beta)
        if not h < 1.0 / (m + 1):
            raise ConstructionError(f"h={h} must be < 1/(m+1)={1 / (m + 1)}")
        base = 1.0 - w.sum() * L * h ** (beta + 1) * ki.integral
        if base < 0:
            raise ConstructionError("bumps too tall: the baseline would be negative")
        if m * h * ki.derivative_energy > 1.0 + 1e-12:
            raise ConstructionError("m h int (K^{(beta)})^2 exceeds 1")
        self.L, self.beta, self.m, self.h = float(L), int(beta), int(m), float(h)
        self.omega = w
        self.nu = ki.nu
        self.baseline = base
        self.amplitude = self.L * self.h**self.beta
        self._ki = ki

    @property
    def active_centers(self) -> np.ndarray:
        return slot_centers(self.m)[self.omega == 1]

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        i = np.rint(x * (self.m + 1)).astype(int)
        valid = (i >= 1) & (i <= self.m)
        active = np.zeros(x.shape, dtype=bool)
        active[valid] = self.omega[i[valid] - 1] == 1
        u = (x - i / (self.m + 1)) / self.h
        out = np.full(x.shape, self.baseline)
        bump = active & (np.abs(u) < 0.5)
        out[bump] += self.amplitude * kernel(u[bump], self.beta)
        return out

    def breakpoints(self):
        c = self.active_centers
        pts = np.concatenate([[0.0, 1.0], c - self.h / 2, c, c + self.h / 2])
        return np.unique(np.clip(pts, 0.0, 1.0))

    def upper_bound(self):
        # global uniform envelope
        return 1.0 + self.amplitude * self.nu * math.exp(-1.0)

    def coefficients(self, N):
        """theta from the cosine transform of K: each bump contributes L h^{beta+1} Khat(2 pi k h)."""
        theta = np.zeros(N)
        theta[0] = 1.0
        c = self.active_centers
        scale = basis.SQRT2 * self.L * self.h ** (self.beta + 1)
        for j in range(2, N + 1):
            k = basis.frequency(j)
            khat = kernel_cosine_transform(2.0 * np.pi * k * self.h, self.beta)
            trig = np.sin if j % 2 == 0 else np.cos
            theta[j - 1] = scale * khat * float(np.sum(trig(2.0 * np.pi * k * c)))
        return theta

    def kernel_energy(self, order: int) -> float:
        if order == self.beta:
            return self._ki.derivative_energy
        if order == self.beta + 1:
            return self._ki.next_derivative_energy
        ki = self.nu * self.nu * 4.0**order / 2.0
        return ki * _quad_sym(lambda y: float(kernel0_derivative(y, order)) ** 2)

    def sobolev_energy(self, order):
        """Bumps have disjoint supports, so energies add: |omega| L^2 h^{2 beta - 2 order + 1} int (K^{(order)})^2."""
        if order == 0:
            k = self.omega.sum()
            return float(
                self.baseline**2 + 2 * self.baseline * k * self.amplitude * self.h * self._ki.integral
                + k * self.amplitude**2 * self.h * self._ki.integral_sq
            )
        k = int(self.omega.sum())
        return k * self.L**2 * self.h ** (2 * self.beta - 2 * order + 1) * self.kernel_energy(order)

    def lipschitz_constant(self):
        return self.L * self.h ** (self.beta - 1) * self._ki.max_slope

    def params(self):
        return {
            "family": "bump", "L": self.L, "beta": self.beta, "m": self.m, "h": self.h,
            "omega": "".join(map(str, self.omega)),
        }


def make_bump_packing(L: float, beta: int, m: int, omega, h: float) -> SmoothBumpPacking:
    return SmoothBumpPacking(L, beta, m, omega, h)


# ---------------------------------------------------------------------------
# Fourier series and mixtures


class FourierSeries(Density):
    """sum_i theta_i phi_i on the trigonometric basis (theta_1 = 1 for a density)."""

    label = "fourier"

    def __init__(self, coefficients):
        self.theta = np.asarray(coefficients, dtype=float).ravel()
        if self.theta.size < 1:
            raise ConstructionError("need at least one coefficient")

    @property
    def N(self) -> int:
        return self.theta.size

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return basis.evaluate_series(self.theta, x.ravel()).reshape(x.shape)

    def upper_bound(self):
        return abs(self.theta[0]) + basis.SQRT2 * float(np.abs(self.theta[1:]).sum())

    def is_density(self, grid_size: int = 10_001) -> bool:
        grid = np.linspace(0.0, 1.0, grid_size)
        return abs(self.theta[0] - 1.0) < 1e-12 and bool(np.all(self.pdf(grid) >= -1e-12))

    def sample(self, n, rng):
        if not self.is_density():
            raise DomainError("series is not a probability density (theta_1 != 1 or negative values)")
        return _rejection_sample(self, n, rng)

    def coefficients(self, N):
        out = np.zeros(N)
        k = min(N, self.N)
        out[:k] = self.theta[:k]
        return out

    def sobolev_energy(self, order):
        a = basis.ellipsoid_weights(self.N)
        return float(np.sum((np.pi * a) ** (2 * order) * self.theta**2))

    def params(self):
        return {"family": "fourier", "N": self.N}


class Mixture(Density):
    """Convex combination of densities (used as the reference measure in Fano's bound)."""

    label = "mixture"

    def __init__(self, components: Sequence[Density], weights=None):
        self.components = list(components)
        if not self.components:
            raise ConstructionError("empty mixture")
        w = np.full(len(self.components), 1.0 / len(self.components)) if weights is None else np.asarray(weights, float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConstructionError("mixture weights must be a probability vector")
        self.weights = w

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(wi * c.pdf(x) for wi, c in zip(self.weights, self.components))

    def breakpoints(self):
        return np.unique(np.concatenate([c.breakpoints() for c in self.components]))

    def upper_bound(self):
        return max(c.upper_bound() for c in self.components)

    def sample(self, n, rng):
        counts = rng.multinomial(n, self.weights)
        parts = [c.sample(int(k), rng) for c, k in zip(self.components, counts)]
        out = np.concatenate(parts) if parts else np.empty(0)
        return rng.permutation(out)

    def coefficients(self, N):
        return sum(wi * c.coefficients(N) for wi, c in zip(self.weights, self.components))


# ---------------------------------------------------------------------------
# sampling, projections, membership


def _rejection_sample(density: Density, n: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampling under the constant envelope ``density.upper_bound()``."""
    if n == 0:
        return np.empty(0)
    top = density.upper_bound()
    out = []
    need = n
    while need > 0:
        batch = int(need * 1.25) + 16
        x = rng.random(batch)
        keep = x[rng.random(batch) * top < density.pdf(x)]
        out.append(keep[:need])
        need -= min(need, keep.size)
    return np.concatenate(out)


def sample(density: Density, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from ``density``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return density.sample(int(n), rng)


def quad_coefficients(density: Density, N: int, tol: float = QUAD_TOL) -> np.ndarray:
    """theta_i = int density * phi_i by adaptive oscillatory quadrature between breakpoints."""
    bp = density.breakpoints()
    panels = list(zip(bp[:-1], bp[1:]))
    f = lambda x: float(density.pdf(x))  # noqa: E731
    theta = np.empty(N)
    theta[0] = sum(integrate.quad(f, a, b, epsabs=tol, limit=200)[0] for a, b in panels)
    for j in range(2, N + 1):
        w = 2.0 * np.pi * basis.frequency(j)
        weight = "sin" if j % 2 == 0 else "cos"
        theta[j - 1] = basis.SQRT2 * sum(
            integrate.quad(f, a, b, weight=weight, wvar=w, epsabs=tol / len(panels), limit=200)[0]
            for a, b in panels
        )
    return theta


def fourier_coefficients(density: Density, N: int) -> FourierSeries:
    if N < 1:
        raise DomainError("N must be >= 1")
    return FourierSeries(density.coefficients(int(N)))


@dataclass(frozen=True)
class ClassSpec:
    kind: str  # "lipschitz" | "sobolev"
    L: float
    beta: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("lipschitz", "sobolev"):
            raise DomainError(f"unknown class {self.kind!r}")
        if not self.L > 0:
            raise DomainError("L must be positive")
        if self.kind == "sobolev" and (self.beta is None or self.beta < 1):
            raise DomainError("periodic Sobolev classes need an integer beta >= 1")

    @classmethod
    def lipschitz(cls, L):
        return cls("lipschitz", float(L))

    @classmethod
    def sobolev(cls, L, beta):
        return cls("sobolev", float(L), int(beta))


@dataclass
class MembershipReport:
    ok: bool
    quantity: float  # max slope, or the ellipsoid sum
    limit: float
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def check_membership(density: Density, spec: ClassSpec, *, truncation: int = 64) -> MembershipReport:
    """Lipschitz: maximal slope <= L.  Periodic Sobolev: sum a_j^{2 beta} theta_j^2 <= L^2 / pi^{2 beta}."""
    if spec.kind == "lipschitz":
        slope = density.lipschitz_constant()
        how = "exact"
        if slope is None:
            grid = np.linspace(0.0, 1.0, 10_001)
            slope = float(np.max(np.abs(np.diff(density.pdf(grid))) / np.diff(grid)))
            how = "finite-difference"
        return MembershipReport(slope <= spec.L * (1 + 1e-12), slope, spec.L, {"method": how})

    beta = spec.beta
    limit = spec.L**2 / np.pi ** (2 * beta)
    theta = density.coefficients(truncation)
    a = basis.ellipsoid_weights(truncation)
    truncated = float(np.sum(a ** (2 * beta) * theta**2))
    energy = density.sobolev_energy(beta)
    details = {"truncation": truncation, "truncated_sum": truncated}
    if energy is None:
        details["certified"] = False
        total = truncated
    else:
        # Parseval: sum_j (pi a_j)^{2 beta} theta_j^2 equals the derivative energy
        total = energy / np.pi ** (2 * beta)
        details["certified"] = True
        details["tail"] = total - truncated
        higher = density.sobolev_energy(beta + 1)
        if higher is not None and math.isfinite(higher):
            a_next = basis.ellipsoid_weights(truncation + 1)[-1]
            details["tail_bound"] = higher / np.pi ** (2 * beta + 2) / a_next**2
    return MembershipReport(total <= limit * (1 + 1e-9), total, limit, details)
