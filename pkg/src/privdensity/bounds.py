"""Divergences between test densities and minimax lower-bound evaluators.

The lower bounds follow the usual reduction to testing: if the members of a
family are pairwise at L^2 distance at least 2 Omega, the squared L^2 risk of
any estimator is at least Omega^2 times the probability of misidentifying the
member, and that probability is bounded below with Le Cam (two members), Fano
(many members) or Assouad (a hypercube of members).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .budget import APPROX, PURE, ZCDP, PrivacyBudget
from .densities import (
    ClassSpec,
    Density,
    Mixture,
    PiecewiseLinearDensity,
    SmoothBumpPacking,
    Uniform,
    kernel,
    kernel_integrals,
    l2_norm_sq_piecewise,
    make_bump_packing,
    make_saw,
    make_triangle,
)
from .errors import ConstructionError, DomainError

QUAD_TOL = 1e-9


# ---------------------------------------------------------------------------
# divergences


def _merged_piecewise(p: PiecewiseLinearDensity, q: PiecewiseLinearDensity):
    x = np.union1d(p.x, q.x)
    return x, p.pdf(x), q.pdf(x)


def _abs_linear_integral(x, d) -> float:
    """Exact integral of |d| for d linear between the knots x."""
    dx = np.diff(x)
    a, b = d[:-1], d[1:]
    same = a * b >= 0
    out = np.where(same, 0.5 * np.abs(a + b) * dx, 0.0)
    cross = ~same
    # a sign change splits the segment into two triangles
    out[cross] = 0.5 * dx[cross] * (a[cross] ** 2 + b[cross] ** 2) / (np.abs(a[cross]) + np.abs(b[cross]))
    return math.fsum(out)


def _min_linear_integral(x, u, v) -> float:
    """Exact integral of min(u, v) for u, v linear between the knots x."""
    # min = (u + v - |u - v|) / 2
    total = 0.5 * math.fsum(0.5 * (u[1:] + u[:-1] + v[1:] + v[:-1]) * np.diff(x))
    return total - 0.5 * _abs_linear_integral(x, u - v)


def _crossings(fn, a: float, b: float, samples: int = 65) -> list:
    """Sign changes of fn on [a, b] located by bracketing on a grid."""
    t = np.linspace(a, b, samples)
    y = np.array([fn(v) for v in t])
    roots = []
    for i in range(samples - 1):
        if y[i] == 0.0:
            roots.append(t[i])
        elif y[i] * y[i + 1] < 0:
            roots.append(optimize.brentq(fn, t[i], t[i + 1], xtol=1e-15))
    return roots


def _split_points(p: Density, q: Density, fn=None) -> np.ndarray:
    pts = np.union1d(p.breakpoints(), q.breakpoints())
    if fn is None:
        return pts
    extra = []
    for a, b in zip(pts[:-1], pts[1:]):
        extra += _crossings(fn, a, b)
    return np.union1d(pts, extra)


def _quad_panels(fn, pts, tol=QUAD_TOL) -> float:
    tol_each = tol / max(1, len(pts) - 1)
    return math.fsum(
        integrate.quad(fn, a, b, epsabs=tol_each, epsrel=1e-12, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]) if b > a
    )


def _same_bump_family(p, q) -> bool:
    """Both densities are bump packings with the same (L, beta, m, h), the uniform counting as omega = 0."""
    if isinstance(p, Uniform) and isinstance(q, SmoothBumpPacking):
        return True
    if isinstance(q, Uniform) and isinstance(p, SmoothBumpPacking):
        return True
    return (
        isinstance(p, SmoothBumpPacking)
        and isinstance(q, SmoothBumpPacking)
        and (p.L, p.beta, p.m, p.h) == (q.L, q.beta, q.m, q.h)
    )


def _bump_view(f, partner):
    """(omega, baseline) of f, reading the uniform as the empty packing of ``partner``'s family."""
    if isinstance(f, SmoothBumpPacking):
        return f.omega, f.baseline
    return np.zeros(partner.m, dtype=int), 1.0


@functools.lru_cache(maxsize=4096)
def _abs_shifted_kernel(c: float, beta: int) -> float:
    """int_{-1/2}^{1/2} |c + K(u)| du."""
    ki = kernel_integrals(beta)
    if c >= 0:
        return c + ki.integral
    if -c >= ki.peak:
        return -c - ki.integral
    # K(u) = -c at u = +-r, positive difference inside
    r = optimize.brentq(lambda u: float(kernel(u, beta)) + c, 0.0, 0.5, xtol=1e-15)
    g = lambda u: float(kernel(u, beta)) + c  # noqa: E731
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    inner = integrate.quad(g, 0.0, r, **opts)[0]
    outer = integrate.quad(g, r, 0.5, **opts)[0]
    return 2.0 * (inner - outer)


def _bump_pair_terms(p, q):
    """(#slots only p uses, #slots only q uses, baseline gap, a bump density of the family)."""
    ref = p if isinstance(p, SmoothBumpPacking) else q
    wp, bp = _bump_view(p, ref)
    wq, bq = _bump_view(q, ref)
    s = wp - wq
    return int(np.sum(s == 1)), int(np.sum(s == -1)), bp - bq, ref


@functools.lru_cache(maxsize=4096)
def _entropy_term(b: float, A: float, beta: int) -> float:
    """int_{-1/2}^{1/2} (b + A K) ln(b + A K) du."""
    def g(u):
        v = b + A * float(kernel(u, beta))
        return v * math.log(v) if v > 0 else 0.0

    opts = dict(epsabs=1e-15, epsrel=1e-12, limit=200)
    return 2.0 * integrate.quad(g, 0.0, 0.5, **opts)[0]


def tv(p: Density, q: Density) -> float:
    """Total variation 1/2 int |p - q|."""
    if isinstance(p, PiecewiseLinearDensity) and isinstance(q, PiecewiseLinearDensity):
        x, u, v = _merged_piecewise(p, q)
        return min(1.0, 0.5 * _abs_linear_integral(x, u - v))
    if _same_bump_family(p, q):
        # disjoint bumps: the difference is db off the differing slots, db +- A K inside
        plus, minus, db, ref = _bump_pair_terms(p, q)
        A, h = ref.amplitude, ref.h
        outside = abs(db) * (1.0 - h * (plus + minus))
        inside = h * A * (plus * _abs_shifted_kernel(db / A, ref.beta) + minus * _abs_shifted_kernel(-db / A, ref.beta))
        return min(1.0, 0.5 * (outside + inside))
    d = lambda x: float(p.pdf(x) - q.pdf(x))  # noqa: E731
    pts = _split_points(p, q, d)
    return min(1.0, 0.5 * _quad_panels(lambda x: abs(d(x)), pts))


def tv_min_form(p: Density, q: Density) -> float:
    """Total variation as 1 - int min(p, q)."""
    if isinstance(p, PiecewiseLinearDensity) and isinstance(q, PiecewiseLinearDensity):
        x, u, v = _merged_piecewise(p, q)
        return 1.0 - _min_linear_integral(x, u, v)
    d = lambda x: float(p.pdf(x) - q.pdf(x))  # noqa: E731
    pts = _split_points(p, q, d)
    return 1.0 - _quad_panels(lambda x: float(min(p.pdf(x), q.pdf(x))), pts)


def l2_distance_sq(p: Density, q: Density) -> float:
    """int (p - q)^2."""
    if isinstance(p, PiecewiseLinearDensity) and isinstance(q, PiecewiseLinearDensity):
        x, u, v = _merged_piecewise(p, q)
        return l2_norm_sq_piecewise(x, u - v)
    if _same_bump_family(p, q):
        plus, minus, _, ref = _bump_pair_terms(p, q)
        ki = kernel_integrals(ref.beta)
        A, h = ref.amplitude, ref.h
        return A * A * h * ki.integral_sq * (plus + minus) - (A * h * ki.integral * (plus - minus)) ** 2
    pts = _split_points(p, q)
    return _quad_panels(lambda x: float(p.pdf(x) - q.pdf(x)) ** 2, pts, tol=1e-12)


def kl(p: Density, q: Density, grid_size: int = 4097) -> float:
    """int p ln(p / q); requires q > 0 wherever p > 0."""
    if isinstance(p, SmoothBumpPacking) and isinstance(q, Uniform):
        # disjoint bumps on a constant baseline: one kernel integral per active slot
        k = int(p.omega.sum())
        b = p.baseline
        flat = b * math.log(b) if b > 0 else 0.0
        return max(0.0, (1.0 - k * p.h) * flat + k * p.h * _entropy_term(b, p.amplitude, p.beta))
    pts = _split_points(p, q)
    grid = np.union1d(np.linspace(0.0, 1.0, grid_size), pts)
    pv, qv = p.pdf(grid), q.pdf(grid)
    if np.any((pv > 0) & (qv <= 0)):
        raise DomainError("p is not absolutely continuous with respect to q")

    def integrand(x):
        a = float(p.pdf(x))
        if a <= 0.0:
            return 0.0
        b = float(q.pdf(x))
        if b <= 0.0:
            raise DomainError("p is not absolutely continuous with respect to q")
        return a * math.log(a / b)

    return max(0.0, _quad_panels(integrand, pts))


def renyi_gaussian(alpha: float, mean_gap: float, sigma: float) -> float:
    """Renyi divergence of order alpha between N(mu, sigma^2) and N(mu + gap, sigma^2)."""
    if not alpha > 1.0:
        raise DomainError("alpha must exceed 1")
    if not sigma > 0.0:
        raise DomainError("sigma must be positive")
    return alpha * mean_gap * mean_gap / (2.0 * sigma * sigma)


# ---------------------------------------------------------------------------
# codes


@dataclass(frozen=True)
class CodeSet:
    m: int
    words: np.ndarray  # shape (M, m), 0/1, first row is the zero word

    @property
    def size(self) -> int:
        return self.words.shape[0]

    def min_distance(self) -> int:
        return int(pairwise_hamming(self.words)[~np.eye(self.size, dtype=bool)].min()) if self.size > 1 else self.m


def pairwise_hamming(words) -> np.ndarray:
    w = np.asarray(words, dtype=np.int64)
    return (w[:, None, :] != w[None, :, :]).sum(axis=-1)


def verify_code(code: CodeSet) -> bool:
    """Exhaustive check of the size, zero word and distance requirements."""
    w = code.words
    if w.ndim != 2 or w.shape[1] != code.m or not np.all((w == 0) | (w == 1)):
        return False
    if w.shape[0] < 2 ** (code.m / 8) or np.any(w[0] != 0):
        return False
    d = pairwise_hamming(w)
    off = ~np.eye(w.shape[0], dtype=bool)
    return bool(np.all(d[off] >= code.m / 8))


VG_RETRY_BUDGET = 1_000_000


def varshamov_gilbert(m: int, rng: np.random.Generator, retry_budget: int = VG_RETRY_BUDGET) -> CodeSet:
    """Zero word plus ceil(2^{m/8}) random words at pairwise Hamming distance >= m/8.

    Randomized greedy: candidates are drawn uniformly from {0, 1}^m and kept when
    far enough from every word kept so far. The result is re-verified.
    """
    if m < 8:
        raise DomainError("the construction needs m >= 8")
    target = 1 + math.ceil(2 ** (m / 8))
    dmin = math.ceil(m / 8 - 1e-12)
    words = [np.zeros(m, dtype=np.int8)]
    tried = 0
    batch = 256
    while len(words) < target:
        if tried >= retry_budget:
            raise ConstructionError(
                f"retry budget exhausted after {tried} samples with {len(words)}/{target} words"
            )
        cand = rng.integers(0, 2, size=(min(batch, retry_budget - tried), m), dtype=np.int8)
        for c in cand:
            tried += 1
            kept = np.array(words)
            if np.all((kept != c).sum(axis=1) >= dmin):
                words.append(c)
                if len(words) == target:
                    break
    code = CodeSet(m=m, words=np.array(words, dtype=np.int8))
    if not verify_code(code):
        raise ConstructionError("constructed code failed verification")
    return code


def hypercube(m: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int8)


# ---------------------------------------------------------------------------
# testing-difficulty bounds


def lecam_bound(tv01: float, n: int, budget: Optional[PrivacyBudget]) -> float:
    """Lower bound on the worst-case error of a two-point test from n samples."""
    if not 0.0 <= tv01 <= 1.0:
        raise DomainError("tv must lie in [0, 1]")
    if n < 1:
        raise DomainError("n must be >= 1")
    if budget is None:
        # the n-fold product has tv <= 1 - (1 - tv)^n
        return 0.5 * (1.0 - tv01) ** n
    if budget.kind in (PURE, APPROX):
        eps, delta = budget.epsilon, budget.delta
        val = 0.5 * ((1.0 - (1.0 - math.exp(-eps)) * tv01) ** n - 2.0 * n * math.exp(-eps) * delta * tv01)
        return min(0.5, max(0.0, val))
    return max(0.0, 0.5 * (1.0 - n * math.sqrt(budget.rho / 2.0) * tv01))


def fano_bound(
    pairwise_tv,
    M: int,
    n: int,
    budget: Optional[PrivacyBudget],
    *,
    mean_kl: Optional[float] = None,
) -> float:
    """Lower bound on the worst-case error of an M-ary test, clamped to [0, 1].

    Pure: 1 - (1 + (n eps / M^2) sum_{ij} u_ij) / ln M with u = 2 t / (1 + t).
    zCDP: 1 - (1 + (n^2 rho / M^2) sum_{ij} (u_ij / n + u_ij^2)) / ln M.
    No budget: 1 - (1 + n * mean_kl) / ln M, mean_kl being the average KL of the
    members to their uniform mixture.
    """
    if M < 2:
        raise DomainError("need M >= 2")
    if n < 1:
        raise DomainError("n must be >= 1")
    return min(1.0, max(0.0, fano_raw(pairwise_tv, M, n, budget, mean_kl=mean_kl)))


def fano_raw(pairwise_tv, M, n, budget, *, mean_kl=None) -> float:
    """Unclamped value of :func:`fano_bound`."""
    if budget is None:
        if mean_kl is None:
            raise DomainError("the non-private bound needs the mean KL to the mixture")
        return 1.0 - (1.0 + n * mean_kl) / math.log(M)
    t = np.asarray(pairwise_tv, dtype=float)
    if t.shape != (M, M):
        raise DomainError(f"pairwise tv must be {M}x{M}")
    u = 2.0 * t / (1.0 + t)
    if budget.kind == PURE:
        s = math.fsum((n * budget.epsilon / M**2 * u).ravel())
    elif budget.kind == ZCDP:
        s = n * n * budget.rho / M**2 * math.fsum((u / n + u * u).ravel())
    else:
        raise DomainError("no Fano bound for approximate budgets")
    return 1.0 - (1.0 + s) / math.log(M)


def assouad_bound(tau: float, m: int, per_coordinate_tv: Sequence[float], n: int, rho: float) -> float:
    """(tau / 16) sum_i 1/2 max(0, 1 - n sqrt(rho / 2) t_i) for a rho-zCDP estimator."""
    t = np.asarray(per_coordinate_tv, dtype=float)
    if t.size != m:
        raise DomainError(f"need {m} coordinate tv values, got {t.size}")
    if not tau > 0 or not rho > 0 or n < 1:
        raise DomainError("need tau > 0, rho > 0 and n >= 1")
    terms = 0.5 * np.maximum(0.0, 1.0 - n * math.sqrt(rho / 2.0) * t)
    return tau / 16.0 * math.fsum(terms)


# ---------------------------------------------------------------------------
# packings


@dataclass
class PackingFamily:
    members: list
    pairwise_l2: np.ndarray
    radius: float
    kind: str = "custom"
    words: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.members)


def make_packing(members: Sequence[Density], kind="custom", words=None, params=None) -> PackingFamily:
    M = len(members)
    if M < 2:
        raise ConstructionError("a packing needs at least two members")
    d = np.zeros((M, M))
    for i in range(M):
        for j in range(i + 1, M):
            d[i, j] = d[j, i] = math.sqrt(max(0.0, l2_distance_sq(members[i], members[j])))
    radius = float(d[~np.eye(M, dtype=bool)].min()) / 2.0
    return PackingFamily(list(members), d, radius, kind, words, dict(params or {}))


def triangle_packing(L: float, x0: float, h: float) -> PackingFamily:
    return make_packing([Uniform(), make_triangle(L, x0, h)], "triangle", params={"L": L, "x0": x0, "h": h})


def saw_member(L, m, omega, h) -> Density:
    return Uniform() if not np.any(omega) else make_saw(L, m, omega, h)


def bump_member(L, beta, m, omega, h) -> Density:
    return Uniform() if not np.any(omega) else make_bump_packing(L, beta, m, omega, h)


def saw_packing(L: float, m: int, h: float, words) -> PackingFamily:
    words = np.asarray(words, dtype=np.int8)
    members = [saw_member(L, m, w, h) for w in words]
    return make_packing(members, "saw", words, {"L": L, "m": m, "h": h})


def bump_packing(L: float, beta: int, m: int, h: float, words) -> PackingFamily:
    words = np.asarray(words, dtype=np.int8)
    members = [bump_member(L, beta, m, w, h) for w in words]
    return make_packing(members, "bump", words, {"L": L, "beta": beta, "m": m, "h": h})


def saw_tau(L, m, h) -> float:
    """tau with ||f_w - f_w'||^2 >= 2 tau Ham(w, w') for saws."""
    return L * L * h**3 * (1.0 - 3.0 * m * h) / 3.0


def bump_tau(L, beta, m, h) -> float:
    ki = kernel_integrals(beta)
    return 0.5 * L * L * h ** (2 * beta + 1) * (ki.integral_sq - 2.0 * m * h * ki.integral**2)


def coordinate_tv_bound(kind, L, m, h, beta=1) -> float:
    """Bound on the tv between two family members differing in one slot."""
    if kind == "saw":
        return L * h * h
    return L * h ** (beta + 1) * kernel_integrals(beta).integral


@dataclass(frozen=True)
class BoundReport:
    bound_kind: str
    m: int
    h: float
    n: int
    budget: Optional[PrivacyBudget]
    value: float
    testing: float = float("nan")

    def row(self):
        b = self.budget
        return [self.bound_kind, self.m, repr(float(self.h)), self.n, "none" if b is None else b.describe(),
                repr(float(self.value))]


BOUND_COLUMNS = ["bound_kind", "m", "h", "n", "budget", "value"]


def packing_bounds(packing: PackingFamily, n: int, budget: Optional[PrivacyBudget]) -> list:
    """Every applicable lower bound on the worst-case squared L^2 risk over the packing."""
    M = packing.size
    omega2 = packing.radius**2
    m = int(packing.params.get("m", 1))
    h = float(packing.params.get("h", float("nan")))
    out = []
    if budget is not None and budget.kind == APPROX and budget.delta == 0.0:
        budget_for_tests = PrivacyBudget.pure(budget.epsilon)
    else:
        budget_for_tests = budget
    if M == 2:
        t = tv(packing.members[0], packing.members[1])
        p = lecam_bound(t, n, budget_for_tests)
        out.append(BoundReport("lecam", m, h, n, budget, omega2 * p, p))
    if M >= 3 and (budget_for_tests is None or budget_for_tests.kind in (PURE, ZCDP)):
        T = np.zeros((M, M))
        for i in range(M):
            for j in range(i + 1, M):
                T[i, j] = T[j, i] = tv(packing.members[i], packing.members[j])
        mean_kl = None
        if budget_for_tests is None:
            mix = Mixture(packing.members)
            mean_kl = float(np.mean([kl(f, mix) for f in packing.members]))
        p = fano_bound(T, M, n, budget_for_tests, mean_kl=mean_kl)
        out.append(BoundReport("fano", m, h, n, budget, omega2 * p, p))
    is_cube = packing.words is not None and M == 2**m and len({tuple(w) for w in packing.words}) == M
    if is_cube and budget is not None and budget.kind == ZCDP and packing.kind in ("saw", "bump"):
        beta = int(packing.params.get("beta", 1))
        L = packing.params["L"]
        tau = saw_tau(L, m, h) if packing.kind == "saw" else bump_tau(L, beta, m, h)
        if tau > 0:
            t = [coordinate_tv_bound(packing.kind, L, m, h, beta)] * m
            out.append(BoundReport("assouad", m, h, n, budget, assouad_bound(tau, m, t, n, budget.rho)))
    return out


def best_bound(packing: PackingFamily, n: int, budget: Optional[PrivacyBudget]) -> Optional[BoundReport]:
    reports = packing_bounds(packing, n, budget)
    return max(reports, key=lambda r: r.value) if reports else None


# ---------------------------------------------------------------------------
# rates


@dataclass(frozen=True)
class RateExponents:
    """Exponents of n (non-private) and of n * alpha (private term) in the minimax rate."""

    upper: tuple
    lower: tuple

    @property
    def gap(self) -> bool:
        return self.upper != self.lower

    @property
    def exponents(self) -> tuple:
        return self.upper


def theoretical_rate(cls: ClassSpec, risk: str, budget_kind: Optional[str]) -> RateExponents:
    """Rate exponents for squared risk; the private entry is None without a budget."""
    if risk not in ("pointwise", "sup", "L2"):
        raise DomainError(f"unknown risk {risk!r}")
    kind = None if budget_kind in (None, "none") else budget_kind
    if kind not in (None, PURE, ZCDP):
        raise DomainError(f"no rate for budget kind {budget_kind!r}")
    if cls.kind == "lipschitz":
        pair = (-2.0 / 3.0, None if kind is None else -1.0)
        return RateExponents(pair, pair)
    if risk != "L2":
        raise DomainError("periodic Sobolev rates are only available for the integrated risk")
    b = cls.beta
    classical = -2.0 * b / (2 * b + 1)
    if kind is None:
        return RateExponents((classical, None), (classical, None))
    lower = (classical, -2.0 * b / (b + 1))
    if kind == ZCDP:
        return RateExponents(lower, lower)
    return RateExponents((classical, -2.0 * b / (b + 1.5)), lower)


# ---------------------------------------------------------------------------
# packing inequality checks


@dataclass(frozen=True)
class InequalityCheck:
    family: str
    check: str
    L: float
    m: int
    h: float
    words: str
    value: float
    bound: float
    direction: str  # "<=" or ">="

    @property
    def slack(self) -> float:
        return self.bound - self.value if self.direction == "<=" else self.value - self.bound

    @property
    def ok(self) -> bool:
        return self.slack >= -1e-8

    def row(self):
        return [self.family, self.check, repr(float(self.L)), self.m, repr(float(self.h)), self.words,
                repr(float(self.value)), self.direction, repr(float(self.bound)), repr(float(self.slack)),
                "pass" if self.ok else "FAIL"]


CHECK_COLUMNS = ["family", "check", "L", "m", "h", "words", "value", "relation", "bound", "slack", "status"]


def packing_words(m: int, rng: np.random.Generator, extra_random: int = 16, enumerate_up_to: int = 4) -> np.ndarray:
    """All nonzero words for small m; otherwise a code plus random words."""
    if m <= enumerate_up_to:
        return hypercube(m)[1:]
    parts = []
    if m >= 8:
        parts.append(varshamov_gilbert(m, rng).words[1:])
    rand = rng.integers(0, 2, size=(extra_random, m), dtype=np.int8)
    parts.append(rand[rand.any(axis=1)])
    w = np.unique(np.concatenate(parts), axis=0)
    return w


def _bits(w) -> str:
    return "".join(str(int(b)) for b in w)


def check_saw_family(L: float, m: int, h: float, words) -> list:
    out = []
    U = Uniform()
    members = [make_saw(L, m, w, h) for w in words]
    tv_bound = m * L * h * h
    for w, f in zip(words, members):
        k = int(np.sum(w))
        kl_bound = L * L / 3.0 * k * h**3 * (2.0 - 3.0 * k * h)
        tag = _bits(w)
        out.append(InequalityCheck("saw", "tv(uniform, f)", L, m, h, tag, tv(U, f), tv_bound, "<="))
        out.append(InequalityCheck("saw", "kl(f, uniform)", L, m, h, tag, kl(f, U), kl_bound, "<="))
        out.append(InequalityCheck("saw", "kl(uniform, f)", L, m, h, tag, kl(U, f), kl_bound, "<="))
    sep = 2.0 / 3.0 * L * L * h**3 * (1.0 - 3.0 * m * h)
    for (i, wi), (j, wj) in itertools.combinations(enumerate(words), 2):
        tag = f"{_bits(wi)}|{_bits(wj)}"
        ham = int(np.sum(wi != wj))
        out.append(InequalityCheck("saw", "tv(f, f')", L, m, h, tag, tv(members[i], members[j]), tv_bound, "<="))
        out.append(InequalityCheck("saw", "l2sq(f, f')", L, m, h, tag, l2_distance_sq(members[i], members[j]), ham * sep, ">="))
    return out


def check_bump_family(L: float, beta: int, m: int, h: float, words) -> list:
    out = []
    U = Uniform()
    ki = kernel_integrals(beta)
    members = [make_bump_packing(L, beta, m, w, h) for w in words]
    tv_bound = m * L * h ** (beta + 1) * ki.integral
    kl_bound = m * L * L * h ** (2 * beta + 1) * ki.integral_sq
    for w, f in zip(words, members):
        tag = _bits(w)
        out.append(InequalityCheck("bump", "tv(uniform, f)", L, m, h, tag, tv(U, f), tv_bound, "<="))
        out.append(InequalityCheck("bump", "kl(f, uniform)", L, m, h, tag, kl(f, U), kl_bound, "<="))
    sep = L * L * h ** (2 * beta + 1) * (ki.integral_sq - 2.0 * m * h * ki.integral**2)
    for (i, wi), (j, wj) in itertools.combinations(enumerate(words), 2):
        tag = f"{_bits(wi)}|{_bits(wj)}"
        ham = int(np.sum(wi != wj))
        out.append(InequalityCheck("bump", "tv(f, f')", L, m, h, tag, tv(members[i], members[j]), tv_bound, "<="))
        out.append(InequalityCheck("bump", "l2sq(f, f')", L, m, h, tag, l2_distance_sq(members[i], members[j]), ham * sep, ">="))
    return out


DEFAULT_L = (0.5, 1.0, 2.0)
DEFAULT_SAW_FRACTIONS = (0.25, 0.5, 1.0)
DEFAULT_BUMP_FRACTIONS = (0.25, 0.5, 0.9)
DEFAULT_M = (2, 4, 8, 12)


def verify_packing_grid(
    rng: np.random.Generator,
    L_values=DEFAULT_L,
    saw_fractions=DEFAULT_SAW_FRACTIONS,
    bump_fractions=DEFAULT_BUMP_FRACTIONS,
    m_values=DEFAULT_M,
    beta: int = 1,
    extra_random: int = 16,
) -> list:
    """Run every inequality check on the (L, h, m) grid.

    Saws use h = fraction / (2(m + 1)); bumps use h = fraction / (m + 1).
    Grid points violating a construction precondition are skipped.
    """
    checks = []
    for m in m_values:
        words = packing_words(m, rng, extra_random)
        for L in L_values:
            for frac in saw_fractions:
                h = frac / (2.0 * (m + 1))
                if m * L * h * h >= 1.0:
                    continue
                checks += check_saw_family(L, m, h, words)
            for frac in bump_fractions:
                h = frac / (m + 1)
                try:
                    make_bump_packing(L, beta, m, np.ones(m, dtype=int), h)
                except ConstructionError:
                    continue
                checks += check_bump_family(L, beta, m, h, words)
    return checks
