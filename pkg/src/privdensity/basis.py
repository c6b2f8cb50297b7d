"""Trigonometric basis of L^2([0, 1]).

phi_1 = 1, phi_{2k} = sqrt(2) sin(2 pi k x), phi_{2k+1} = sqrt(2) cos(2 pi k x).
Indices are 1-based throughout to match the usual numbering of the basis.
"""

from __future__ import annotations

import numpy as np

SQRT2 = np.sqrt(2.0)


def frequency(i: int) -> int:
    """Integer frequency k of basis function ``i`` (0 for the constant)."""
    return i // 2


def basis_matrix(x, N: int) -> np.ndarray:
    """Evaluate phi_1..phi_N at points ``x``; returns shape (len(x), N)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, N))
    out[:, 0] = 1.0
    if N > 1:
        K = N // 2
        k = np.arange(1, K + 1)
        arg = 2.0 * np.pi * np.outer(x, k)
        out[:, 1 : 2 * K : 2] = SQRT2 * np.sin(arg)
        n_cos = (N - 1) // 2
        out[:, 2 : 2 + 2 * n_cos : 2] = SQRT2 * np.cos(arg[:, :n_cos])
    return out


def ellipsoid_weights(N: int) -> np.ndarray:
    """a_j for j = 1..N: j when j is even, j - 1 when j is odd."""
    j = np.arange(1, N + 1)
    return np.where(j % 2 == 0, j, j - 1).astype(float)


def evaluate_series(coefficients, x) -> np.ndarray:
    c = np.asarray(coefficients, dtype=float)
    return basis_matrix(x, c.size) @ c
