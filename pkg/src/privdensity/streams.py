"""Seeded random streams.

Every random quantity in the package is drawn from a ``numpy.random.Generator``
passed in explicitly. Replication ``i`` of an experiment seeded with ``seed``
always gets the same stream, no matter which worker runs it or in which order.
"""

from __future__ import annotations

import numpy as np

_TWO_53 = float(2**53)


def make_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def replication_stream(seed: int, index: int) -> np.random.Generator:
    """Stream for replication ``index`` under master ``seed`` (counter-based split)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def uniform_open(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws on the open interval (0, 1).

    ``Generator.random`` returns k / 2**53 with k in [0, 2**53); shifting by half
    a step keeps both endpoints out, so inverse-CDF transforms never see 0 or 1.
    """
    return rng.random(size) + 0.5 / _TWO_53
