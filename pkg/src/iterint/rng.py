"""Counter-based standard normals.

Every stream is a Philox4x64-10 generator whose 128-bit key is derived from
``(seed, domain, stream, component)`` through :class:`numpy.random.SeedSequence`.
The n-th 64-bit output depends only on the key and the counter n, so a draw
is a pure function of its coordinates: extending a stream never changes its
prefix, and streams can be produced in any order.  Uniforms are mapped to
normals by the inverse CDF (one output per normal).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

GENERATOR = "philox4x64-10+inverse-cdf"

DRAWS_DOMAIN = 0
PATH_DOMAIN = 1


def normal_stream(seed: int, domain: int, stream: int, component: int, count: int) -> np.ndarray:
    """``count`` standard normals for one (seed, domain, stream, component) key."""
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    key = np.random.SeedSequence(int(seed), spawn_key=(domain, int(stream), int(component))).generate_state(
        2, np.uint64
    )
    raw = np.random.Philox(key=key).random_raw(count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)
