"""Robust moment-based estimation of the drift and noise parameters.

For a series with mean shifts the lagged differences ``y_{t+k} - y_t`` are
almost free of the (sparse) shifts, and under the random-walk-plus-AR(1)
model their variance is

    V_k = k*sigma_eta_sq + 2*(1 - phi**k)/(1 - phi**2) * sigma_nu_sq.

Each ``V_k`` is estimated robustly with a squared scaled median absolute
deviation, and the three parameters are fitted by least squares on that
variance-versus-lag curve: ``phi`` over a fixed grid, and for each grid
value the two variances in closed form with non-negativity enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InvalidParameterError
from .solver import ModelParams, variant_for

#: consistency factor mapping a Gaussian MAD to a standard deviation
GAUSSIAN_MAD_SCALE = 1.4826

#: default number of lags entering the fit
DEFAULT_LAGS = 15


@dataclass(frozen=True)
class LagVarianceProfile:
    """Robust variance of the lag-``k`` differences for ``k = 1 .. K``."""

    K: int
    v: np.ndarray

    def __post_init__(self) -> None:
        if self.K < 2:
            raise InvalidParameterError(f"need at least 2 lags, got K={self.K}")
        if len(self.v) != self.K:
            raise InvalidParameterError("profile length does not match K")


@dataclass(frozen=True)
class EstimatedParams:
    """Fitted parameters plus fit diagnostics.

    ``residual`` is the sum of squared deviations between the fitted and
    empirical lag-variance curves at the selected ``phi``;
    ``recommended_variant`` names the most constrained solver variant the
    fitted values support (drift-free fits should be solved drift-free).
    """

    params: ModelParams
    residual: float
    phi_grid_step: float
    recommended_variant: str


def lag_differences(y, k: int) -> np.ndarray:
    """Differences ``y[k:] - y[:-k]`` at lag ``k`` (``1 <= k < len(y)``)."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError("expected a one-dimensional series")
    if not 1 <= k < arr.size:
        raise InvalidParameterError(f"lag must satisfy 1 <= k < n, got k={k}, n={arr.size}")
    return arr[k:] - arr[:-k]


def mad_variance(x) -> float:
    """Squared scaled median absolute deviation of ``x``.

    Returns ``(1.4826 * median(|x - median(x)|))**2``, a variance estimate
    that a handful of mean shifts cannot drag around.  Medians of even-length
    samples average the two central order statistics.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        raise InvalidParameterError("mad_variance needs at least one value")
    med = np.median(arr)
    mad = np.median(np.abs(arr - med))
    return float((GAUSSIAN_MAD_SCALE * mad) ** 2)


def lag_variance_profile(y, K: int = DEFAULT_LAGS) -> LagVarianceProfile:
    """Build the empirical lag-variance curve for lags ``1 .. K``."""
    arr = np.asarray(y, dtype=float)
    if not 2 <= K < arr.size:
        raise InvalidParameterError(f"need 2 <= K < n, got K={K}, n={arr.size}")
    v = np.array([mad_variance(lag_differences(arr, k)) for k in range(1, K + 1)])
    return LagVarianceProfile(K, v)


def _default_phi_grid() -> np.ndarray:
    return np.arange(100) * 0.01


def _fit_variances(x1, x2, v, force_eta_zero: bool):
    """Least squares ``v ~ s_eta*x1 + s_nu*x2`` with both coefficients >= 0."""
    s22 = float(x2 @ x2)
    t2 = float(x2 @ v)
    if force_eta_zero:
        s_nu = max(0.0, t2 / s22)
        r = s_nu * x2 - v
        return 0.0, s_nu, float(r @ r)
    s11 = float(x1 @ x1)
    s12 = float(x1 @ x2)
    t1 = float(x1 @ v)
    det = s11 * s22 - s12 * s12
    s_eta = (s22 * t1 - s12 * t2) / det
    s_nu = (s11 * t2 - s12 * t1) / det
    if s_eta >= 0.0 and s_nu >= 0.0:
        r = s_eta * x1 + s_nu * x2 - v
        return s_eta, s_nu, float(r @ r)
    # project onto the axes and keep the better corner
    nu_only = max(0.0, t2 / s22)
    r = nu_only * x2 - v
    best = (0.0, nu_only, float(r @ r))
    eta_only = max(0.0, t1 / s11)
    r = eta_only * x1 - v
    s_alt = float(r @ r)
    if s_alt < best[2]:
        best = (eta_only, 0.0, s_alt)
    return best


def fit_parameters(
    profile: LagVarianceProfile,
    variant: str = "rw-ar",
    phi_grid=None,
) -> EstimatedParams:
    """Fit ``(sigma_eta_sq, sigma_nu_sq, phi)`` to a lag-variance profile.

    Parameters
    ----------
    profile : LagVarianceProfile
    variant : str
        ``"rw-ar"`` fits all three parameters; ``"ar-only"`` pins
        ``sigma_eta_sq = 0``; ``"rw-only"`` pins ``phi = 0``; ``"iid"`` pins
        both.
    phi_grid : array-like, optional
        Candidate ``phi`` values; defaults to ``0.00, 0.01, ..., 0.99``.
        Ignored by the variants that pin ``phi``.

    Returns
    -------
    EstimatedParams
        The best grid point; grid ties resolve to the smallest ``phi``.

    Notes
    -----
    A grid point whose constrained fit lands on the ``sigma_nu_sq = 0``
    boundary describes a model outside the family (the solver needs a
    positive innovation variance), so such points are skipped when picking
    the winner.  If every grid point is on that boundary the profile
    carries no evidence of stationary noise and a
    :class:`DegenerateDataError` is raised; an all-zero profile is the
    simplest instance.
    """
    if variant not in ("rw-ar", "ar-only", "rw-only", "iid"):
        raise InvalidParameterError(f"unknown variant {variant!r}")
    if variant in ("rw-only", "iid"):
        grid = np.array([0.0])
    else:
        grid = _default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
        if grid.size == 0 or np.any(grid < 0.0) or np.any(grid >= 1.0):
            raise InvalidParameterError("phi grid must be non-empty within [0, 1)")
    force_eta_zero = variant in ("ar-only", "iid")
    ks = np.arange(1, profile.K + 1, dtype=float)
    v = profile.v
    best = None
    for phi in grid:
        x2 = 2.0 * (1.0 - phi**ks) / (1.0 - phi * phi)
        s_eta, s_nu, resid = _fit_variances(ks, x2, v, force_eta_zero)
        if s_nu <= 0.0:
            continue
        if best is None or resid < best[0]:
            best = (resid, float(phi), s_eta, s_nu)
    if best is None:
        raise DegenerateDataError(
            "no candidate phi gives a positive innovation variance; "
            "the series shows no evidence of stationary noise"
        )
    resid, phi, s_eta, s_nu = best
    params = ModelParams(sigma_eta_sq=s_eta, sigma_nu_sq=s_nu, phi=phi)
    step = float(grid[1] - grid[0]) if grid.size > 1 else 0.0
    return EstimatedParams(
        params=params,
        residual=resid,
        phi_grid_step=step,
        recommended_variant=variant_for(params),
    )


def estimate(y, K: int = DEFAULT_LAGS, variant: str = "rw-ar") -> EstimatedParams:
    """Estimate model parameters directly from a series.

    Builds the lag-variance profile for ``K`` lags and fits it.  Raises
    :class:`DegenerateDataError` when every lagged difference has zero
    spread (e.g. a constant series).
    """
    profile = lag_variance_profile(y, K)
    if not np.any(profile.v > 0.0):
        raise DegenerateDataError("all lag variances are zero; constant series?")
    return fit_parameters(profile, variant=variant)
