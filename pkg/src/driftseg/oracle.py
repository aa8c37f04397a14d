"""Slow, independent reference computations used to verify the fast solver.

For a fixed set of change positions the model is a generalised least squares
problem: stacking the observations, ``y = X*Delta + zeta`` where ``X`` is a
cumulative-step design matrix and ``zeta`` has covariance
``Sigma = Sigma_AR + Sigma_RW`` with

    [Sigma_AR]_ij = sigma_nu_sq / (1 - phi**2) * phi**|i-j|
    [Sigma_RW]_ij = sigma_eta_sq * min(i, j)          (1-based indices).

The unpenalised cost of a change set is the GLS objective at its minimiser,
and the exact penalised solution follows from enumerating change sets.  Both
covariances have tridiagonal inverses, which gives a second, independently
coded route to the same cost.  Everything here uses dense linear algebra and
is meant for small ``n``.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .errors import InvalidParameterError
from .solver import ModelParams


def sigma_ar(n: int, params: ModelParams) -> np.ndarray:
    """Stationary AR(1) covariance matrix."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    idx = np.arange(n)
    phi = params.phi
    return params.sigma_nu_sq / (1.0 - phi * phi) * phi ** np.abs(idx[:, None] - idx[None, :])


def sigma_rw(n: int, params: ModelParams) -> np.ndarray:
    """Random-walk covariance ``sigma_eta_sq * min(i, j)`` (zero matrix if off)."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    idx = np.arange(1, n + 1)
    return params.sigma_eta_sq * np.minimum.outer(idx, idx).astype(float)


def ar_precision(n: int, params: ModelParams) -> np.ndarray:
    """Tridiagonal inverse of :func:`sigma_ar`, written out directly."""
    phi = params.phi
    g = 1.0 / params.sigma_nu_sq
    P = np.zeros((n, n))
    for i in range(n):
        P[i, i] = g if i in (0, n - 1) else (1.0 + phi * phi) * g
        if i + 1 < n:
            P[i, i + 1] = P[i + 1, i] = -phi * g
    if n == 1:
        P[0, 0] = (1.0 - phi * phi) * g
    return P


def rw_precision(n: int, params: ModelParams) -> np.ndarray:
    """Tridiagonal inverse of :func:`sigma_rw`; needs ``sigma_eta_sq > 0``."""
    if params.sigma_eta_sq == 0.0:
        raise InvalidParameterError("the random-walk precision needs sigma_eta_sq > 0")
    lam = 1.0 / params.sigma_eta_sq
    P = np.zeros((n, n))
    for i in range(n):
        P[i, i] = lam if i == n - 1 else 2.0 * lam
        if i + 1 < n:
            P[i, i + 1] = P[i + 1, i] = -lam
    return P


def _check_tau(tau, n: int) -> list[int]:
    out = [int(t) for t in tau]
    for i, t in enumerate(out):
        if not 0 < t < n:
            raise InvalidParameterError(f"change position {t} outside (0, {n})")
        if i > 0 and t <= out[i - 1]:
            raise InvalidParameterError("change positions must be strictly increasing")
    return out


def design_matrix(n: int, tau) -> np.ndarray:
    """Cumulative-step design: column ``j`` is 1 from position ``tau_j`` on.

    The first column (``tau_0 = 0``) is the intercept; a change at ``t``
    contributes a column that is zero before index ``t`` and one after.
    """
    taus = [0] + _check_tau(tau, n)
    X = np.zeros((n, len(taus)))
    for j, t in enumerate(taus):
        X[t:, j] = 1.0
    return X


class GlsModel:
    """Cached covariance factorisation for repeated cost evaluations."""

    def __init__(self, n: int, params: ModelParams) -> None:
        self.n = n
        self.params = params
        self.Sigma_AR = sigma_ar(n, params)
        self.Sigma_RW = sigma_rw(n, params)
        self._cho = cho_factor(self.Sigma_AR + self.Sigma_RW, lower=True)

    def solve(self, v: np.ndarray) -> np.ndarray:
        """``(Sigma_AR + Sigma_RW)^{-1} v``."""
        return cho_solve(self._cho, v)

    def cost(self, y, tau) -> float:
        """GLS objective at its minimiser for the change set ``tau``."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise InvalidParameterError(f"series length {y.shape} does not match n={self.n}")
        X = design_matrix(self.n, tau)
        Ainv_X = self.solve(X)
        G = X.T @ Ainv_X
        h = Ainv_X.T @ y
        try:
            delta = np.linalg.solve(G, h)
        except np.linalg.LinAlgError as exc:
            raise InvalidParameterError(f"singular normal equations for tau={tau}") from exc
        r = y - X @ delta
        return float(r @ self.solve(r))


def gls_cost(y, tau, params: ModelParams) -> float:
    """Unpenalised cost of a fixed change set (fresh factorisation)."""
    y = np.asarray(y, dtype=float)
    return GlsModel(len(y), params).cost(y, tau)


def gls_cost_two_block(y, tau, params: ModelParams) -> float:
    """Same cost through the tridiagonal precision matrices.

    Profiles the drift path out of the two-block objective

        min_{Delta, w} (y - X*Delta - w)' P_AR (y - X*Delta - w) + w' P_RW w

    which needs ``sigma_eta_sq > 0``.  Serves as an independently derived
    cross-check of :func:`gls_cost`.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    P_ar = ar_precision(n, params)
    P_rw = rw_precision(n, params)
    M = P_ar - P_ar @ np.linalg.solve(P_ar + P_rw, P_ar)
    X = design_matrix(n, tau)
    G = X.T @ M @ X
    delta = np.linalg.solve(G, X.T @ (M @ y))
    r = y - X @ delta
    return float(r @ M @ r)


def exhaustive_segment(y, params: ModelParams, beta: float, m_max: int | None = None):
    """Exact penalised optimum by enumerating every change set.

    Parameters
    ----------
    y : array-like
    params : ModelParams
    beta : float
        Per-change penalty (``inf`` forces the empty set).
    m_max : int, optional
        Largest change count to consider; defaults to ``n - 1``.

    Returns
    -------
    (list of int, float)
        The optimal change set and its penalised cost.  Cost ties resolve
        to fewer changes, then lexicographically smallest positions.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 1:
        raise InvalidParameterError("need at least one observation")
    if m_max is None:
        m_max = n - 1
    model = GlsModel(n, params)
    best_tau = []
    best_cost = model.cost(y, [])
    for m in range(1, m_max + 1):
        penalty = m * beta
        if penalty == np.inf:
            break
        for tau in itertools.combinations(range(1, n), m):
            total = model.cost(y, tau) + penalty
            if total < best_cost:
                best_cost = total
                best_tau = list(tau)
    return best_tau, float(best_cost)


def grid_dp(y, params: ModelParams, beta: float, grid) -> np.ndarray:
    """Dynamic program with the mean restricted to a finite grid.

    Returns the full ``n x len(grid)`` table of grid-restricted costs-to-go.
    Restricting the mean can only lose optimality, so each entry upper-bounds
    the exact cost functional at that grid value, and the bound tightens as
    the grid is refined.
    """
    y = np.asarray(y, dtype=float)
    grid = np.asarray(grid, dtype=float)
    n, g = len(y), len(grid)
    if n < 1 or g < 1:
        raise InvalidParameterError("need at least one observation and one grid value")
    gam = params.gamma
    phi = params.phi
    if params.sigma_eta_sq == 0.0:
        trans = np.full((g, g), beta)
        np.fill_diagonal(trans, 0.0)
    else:
        lam = 1.0 / params.sigma_eta_sq
        trans = np.minimum(lam * (grid[None, :] - grid[:, None]) ** 2, beta)
    table = np.empty((n, g))
    table[0] = (1.0 - phi * phi) * gam * (y[0] - grid) ** 2
    for t in range(1, n):
        resid = (y[t] - grid[None, :]) - phi * (y[t - 1] - grid[:, None])
        table[t] = np.min(table[t - 1][:, None] + trans + gam * resid**2, axis=0)
    return table


def projection_vector(tau1: int, n: int, params: ModelParams) -> np.ndarray:
    """Contrast vector whose squared inner product with ``y`` is the cost drop.

    For a single candidate change at ``tau1``, ``(v @ y)**2`` equals the
    unpenalised cost reduction ``C([]) - C([tau1])``.  The vector is
    orthogonal to the intercept (``sum(v) == 0``) and normalised so that
    ``v' (Sigma_AR + Sigma_RW) v == 1``.
    """
    if not 0 < tau1 < n:
        raise InvalidParameterError(f"tau1 must lie in (0, {n})")
    A = sigma_ar(n, params) + sigma_rw(n, params)
    u0 = np.ones(n)
    u1 = np.zeros(n)
    u1[tau1:] = 1.0
    Ainv_u0 = np.linalg.solve(A, u0)
    Ainv_u1 = np.linalg.solve(A, u1)
    c0 = float(u0 @ Ainv_u0)
    c01 = float(u0 @ Ainv_u1)
    c1 = float(u1 @ Ainv_u1)
    scale = c1 - c01 * c01 / c0
    return (Ainv_u1 - (c01 / c0) * Ainv_u0) / np.sqrt(scale)


def penalty_alpha(sigma_true: np.ndarray, params: ModelParams) -> float:
    """Largest eigenvalue of ``(Sigma_AR + Sigma_RW)^{-1} Sigma_true``.

    Scales the per-change penalty when the working model underestimates the
    true covariance; equals 1 when ``sigma_true`` is the model covariance.
    """
    sigma_true = np.asarray(sigma_true, dtype=float)
    if sigma_true.ndim != 2 or sigma_true.shape[0] != sigma_true.shape[1]:
        raise InvalidParameterError("sigma_true must be a square matrix")
    n = sigma_true.shape[0]
    if not np.allclose(sigma_true, sigma_true.T, atol=1e-10):
        raise InvalidParameterError("sigma_true must be symmetric")
    A = sigma_ar(n, params) + sigma_rw(n, params)
    return float(eigh(sigma_true, A, eigvals_only=True)[-1])
