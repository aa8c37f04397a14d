"""Tests for the dense GLS reference implementation."""

import numpy as np
import pytest

from driftseg.errors import InvalidParameterError
from driftseg.oracle import (
    GlsModel,
    ar_precision,
    design_matrix,
    exhaustive_segment,
    gls_cost,
    gls_cost_two_block,
    grid_dp,
    penalty_alpha,
    projection_vector,
    rw_precision,
    sigma_ar,
    sigma_rw,
)
from driftseg.solver import ModelParams, SolverConfig, solve

IID = ModelParams(sigma_eta_sq=0.0, sigma_nu_sq=1.0, phi=0.0)
FULL = ModelParams(sigma_eta_sq=0.7, sigma_nu_sq=1.3, phi=0.6)


def test_ar_precision_inverts_covariance():
    for n in (1, 2, 5, 9):
        for phi in (0.0, 0.35, 0.9):
            p = ModelParams(sigma_eta_sq=0.0, sigma_nu_sq=2.5, phi=phi)
            prod = sigma_ar(n, p) @ ar_precision(n, p)
            assert np.allclose(prod, np.eye(n), atol=1e-8)


def test_rw_precision_inverts_covariance():
    for n in (1, 2, 6, 10):
        p = ModelParams(sigma_eta_sq=0.8, sigma_nu_sq=1.0, phi=0.0)
        prod = sigma_rw(n, p) @ rw_precision(n, p)
        assert np.allclose(prod, np.eye(n), atol=1e-8)


def test_covariance_validation():
    with pytest.raises(InvalidParameterError):
        sigma_ar(0, IID)
    with pytest.raises(InvalidParameterError):
        sigma_rw(-3, IID)
    with pytest.raises(InvalidParameterError):
        rw_precision(4, IID)  # sigma_eta_sq == 0 has no inverse


def test_design_matrix_and_tau_validation():
    X = design_matrix(5, [2, 4])
    expected = np.array(
        [
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [1.0, 1.0, 1.0],
        ]
    )
    assert np.array_equal(X, expected)
    for bad in ([0], [5], [3, 2], [2, 2], [-1]):
        with pytest.raises(InvalidParameterError):
            design_matrix(5, bad)


def test_iid_cost_is_segment_rss():
    y = np.array([1.0, 3.0, 2.0, 10.0, 12.0])
    p = ModelParams(sigma_eta_sq=0.0, sigma_nu_sq=2.0, phi=0.0)
    seg1, seg2 = y[:3], y[3:]
    rss = np.sum((seg1 - seg1.mean()) ** 2) + np.sum((seg2 - seg2.mean()) ** 2)
    assert gls_cost(y, [3], p) == pytest.approx(rss / 2.0, rel=1e-12)


def test_constant_series_costs_nothing():
    y = np.full(6, 4.25)
    assert gls_cost(y, [], FULL) == pytest.approx(0.0, abs=1e-10)
    assert gls_cost(y, [2, 4], FULL) == pytest.approx(0.0, abs=1e-10)


def test_two_block_route_agrees(rng):
    for _ in range(10):
        n = int(rng.integers(4, 13))
        y = rng.normal(size=n) * 3.0
        taus = [[], [n // 2]]
        if n >= 6:
            taus.append([2, n - 2])
        for tau in taus:
            a = gls_cost(y, tau, FULL)
            b = gls_cost_two_block(y, tau, FULL)
            assert a == pytest.approx(b, rel=1e-8, abs=1e-10)


def test_model_caches_and_checks_length():
    model = GlsModel(4, IID)
    with pytest.raises(InvalidParameterError):
        model.cost(np.zeros(5), [])
    y = np.array([0.0, 0.0, 5.0, 5.0])
    assert model.cost(y, [2]) == pytest.approx(0.0, abs=1e-12)


def test_exhaustive_six_point_example():
    y = np.array([0.0, 0.0, 0.0, 10.0, 10.0, 10.0])
    tau, cost = exhaustive_segment(y, IID, beta=4.0)
    assert tau == [3]
    assert cost == pytest.approx(4.0, abs=1e-10)


def test_exhaustive_infinite_penalty_keeps_empty_set():
    y = np.array([0.0, 9.0, 1.0, 8.0])
    tau, cost = exhaustive_segment(y, IID, beta=np.inf)
    assert tau == []
    assert cost == pytest.approx(gls_cost(y, [], IID), rel=1e-12)


def test_exhaustive_prefers_fewer_changes_on_ties():
    # With beta == 0 and constant data every change set costs zero; the
    # reported optimum must still be the empty set.
    tau, cost = exhaustive_segment(np.ones(5), IID, beta=0.0)
    assert tau == []
    assert cost == pytest.approx(0.0, abs=1e-12)


def test_exhaustive_breaks_cost_ties_lexicographically():
    # Symmetric series: a single change at 1 or at 3 fits equally well
    # (residual sum 96 either way); the earlier position must win.
    y = np.array([0.0, 12.0, 12.0, 0.0])
    assert gls_cost(y, [1], IID) == gls_cost(y, [3], IID)
    tau, cost = exhaustive_segment(y, IID, beta=10.0, m_max=1)
    assert tau == [1]
    assert cost == pytest.approx(106.0, abs=1e-9)


def test_exhaustive_rejects_empty_series():
    with pytest.raises(InvalidParameterError):
        exhaustive_segment(np.array([]), IID, beta=1.0)


def test_grid_dp_tightens_under_refinement(rng):
    p = ModelParams(sigma_eta_sq=0.5, sigma_nu_sq=1.0, phi=0.4)
    y = rng.normal(size=8) * 2.0
    beta = 3.0
    lo, hi = y.min() - 1.0, y.max() + 1.0
    coarse = np.linspace(lo, hi, 9)
    fine = np.sort(np.concatenate([coarse, 0.5 * (coarse[:-1] + coarse[1:])]))
    c_coarse = grid_dp(y, p, beta, coarse)[-1].min()
    c_fine = grid_dp(y, p, beta, fine)[-1].min()
    assert c_fine <= c_coarse + 1e-12
    exact = solve(y, p, SolverConfig(beta=beta)).cost
    assert exact <= c_fine + 1e-9


def test_grid_dp_exact_when_grid_contains_truth():
    y = np.array([0.0, 0.0, 0.0, 10.0, 10.0, 10.0])
    table = grid_dp(y, IID, beta=4.0, grid=np.array([0.0, 10.0]))
    assert table.shape == (6, 2)
    assert table[-1].min() == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        grid_dp(y, IID, beta=4.0, grid=np.array([]))


def test_projection_vector_identities(rng):
    cases = [
        (8, 3, FULL),
        (10, 5, IID),
        (12, 2, ModelParams(sigma_eta_sq=0.2, sigma_nu_sq=0.9, phi=0.0)),
        (7, 6, ModelParams(sigma_eta_sq=0.0, sigma_nu_sq=2.0, phi=0.5)),
    ]
    for n, tau1, p in cases:
        v = projection_vector(tau1, n, p)
        A = sigma_ar(n, p) + sigma_rw(n, p)
        assert abs(v.sum()) < 1e-10
        assert v @ A @ v == pytest.approx(1.0, abs=1e-10)
        y = rng.normal(size=n) * 2.0 + 1.0
        drop = gls_cost(y, [], p) - gls_cost(y, [tau1], p)
        assert (v @ y) ** 2 == pytest.approx(drop, rel=1e-8, abs=1e-10)


def test_projection_vector_matches_cusum_for_iid():
    # With white noise the contrast reduces to the classical cusum statistic
    # sqrt(m1 * m2 / n) * (mean2 - mean1) / sigma.
    n, tau1 = 9, 4
    p = ModelParams(sigma_eta_sq=0.0, sigma_nu_sq=2.25, phi=0.0)
    v = projection_vector(tau1, n, p)
    y = np.array([0.5, 1.0, -0.5, 2.0, 4.0, 3.5, 5.0, 4.0, 4.5])
    m1, m2 = tau1, n - tau1
    cusum = np.sqrt(m1 * m2 / n) * (y[tau1:].mean() - y[:tau1].mean()) / 1.5
    assert v @ y == pytest.approx(cusum, rel=1e-10)
    with pytest.raises(InvalidParameterError):
        projection_vector(0, n, p)
    with pytest.raises(InvalidParameterError):
        projection_vector(n, n, p)


def test_penalty_alpha_identity_and_scaling():
    n = 15
    A = sigma_ar(n, FULL) + sigma_rw(n, FULL)
    assert penalty_alpha(A, FULL) == pytest.approx(1.0, rel=1e-10)
    assert penalty_alpha(3.0 * A, FULL) == pytest.approx(3.0, rel=1e-10)
    inflated = A + np.eye(n)
    assert penalty_alpha(inflated, FULL) > 1.0
    with pytest.raises(InvalidParameterError):
        penalty_alpha(np.ones((2, 3)), FULL)
    with pytest.raises(InvalidParameterError):
        penalty_alpha(np.array([[1.0, 0.5], [0.0, 1.0]]), FULL)
