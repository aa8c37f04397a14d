"""Grid-based oracles shared by the piecewise-quadratic tests.

The key helper computes ``min_u f(u) + omega*(u - theta)**2`` exactly on a
uniform grid via a lower-envelope-of-parabolas sweep (linear time), which a
naive chunked broadcast cross-checks on subsamples.  Keeping two independent
oracles guards the oracle itself.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


def pwq_on_grid(f, xs: np.ndarray) -> np.ndarray:
    """Evaluate a PiecewiseQuadratic on an array of points, vectorised."""
    xs = np.asarray(xs, dtype=float)
    bounds = np.array(f.bounds)
    idx = np.searchsorted(bounds, xs, side="right") - 1
    out = np.empty_like(xs)
    for k, (_, a, b, c) in enumerate(f.pieces):
        sel = idx == k
        if np.any(sel):
            x = xs[sel]
            out[sel] = (a * x + b) * x + c
    return out


@njit(cache=True)
def _envelope_uniform(fu: np.ndarray, c: float) -> np.ndarray:
    """``out[q] = min_j fu[j] + c*(q - j)**2`` for every grid index ``q``."""
    n = fu.shape[0]
    v = np.empty(n, np.int64)
    z = np.empty(n + 1)
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    k = 0
    for q in range(1, n):
        while True:
            p = v[k]
            s = ((fu[q] + c * q * q) - (fu[p] + c * p * p)) / (2.0 * c * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    out = np.empty(n)
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d = q - v[k]
        out[q] = c * d * d + fu[v[k]]
    return out


def grid_inf(fu: np.ndarray, step: float, omega: float) -> np.ndarray:
    """Grid infimal convolution: values at every grid point of the ``fu`` grid."""
    if omega == 0.0:
        return np.full_like(fu, fu.min())
    return _envelope_uniform(np.asarray(fu, dtype=float), omega * step * step)


def grid_inf_naive(fu: np.ndarray, us: np.ndarray, omega: float, thetas: np.ndarray) -> np.ndarray:
    """Direct min over the grid, chunked; the slow cross-check oracle."""
    out = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        out[i] = np.min(fu + omega * (us - th) ** 2)
    return out
