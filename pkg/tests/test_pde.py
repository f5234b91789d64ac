"""Тести детермінованих розв'язувачів і тотожності дисипації."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from quasilinear.measure import QuantileProfile, StepCDF, wasserstein_pp_quantile
from quasilinear.model import from_callables, logistic_demo, porous_medium, viscous_conservation
from quasilinear.pde import (
    DT_FLOOR_EXPONENT,
    _output_steps,
    dissipation_identity_check,
    dissipation_rate,
    fd_solve,
    grid_quantiles,
    quantile_grid,
    quantile_pde_solve,
    truncated_domain,
    weighted_l2,
)
from quasilinear.stationary import stationary_cdf

LOGISTIC = logistic_demo(1.0)
GAUSS = QuantileProfile.from_function(stats.norm.ppf, lower="divergent", upper="divergent")


def _logistic_cdf(x):
    return 1.0 / (1.0 + np.exp(-2.0 * np.asarray(x)))


def test_fd_rejects_unstable_step_and_bad_input():
    x = np.linspace(-1.0, 1.0, 101)
    f0 = stats.norm.cdf(x)
    with pytest.raises(ValueError):
        fd_solve(LOGISTIC, x, f0, dt=1e-3, t_end=0.1)
    with pytest.raises(ValueError):
        fd_solve(LOGISTIC, x, f0[::-1], dt=1e-5, t_end=0.1)
    with pytest.raises(ValueError):
        fd_solve(LOGISTIC, x, f0, dt=1e-5, t_end=0.1, scheme="crank")


def test_output_times_accept_arrays():
    assert _output_steps(np.array([0.5, 0.25]), 1.0) == [0.0, 0.25, 0.5, 1.0]
    assert _output_steps(np.linspace(0.0, 1.0, 3), 1.0) == [0.0, 0.5, 1.0]
    assert _output_steps(None, 0.5) == [0.0, 0.5]
    with pytest.raises(ValueError):
        _output_steps(np.array([1.5]), 1.0)


def test_fd_keeps_stationary_profile():
    x = np.arange(-8.0, 8.0 + 1e-9, 0.01)
    f0 = _logistic_cdf(x)
    sol = fd_solve(LOGISTIC, x, f0, dt=5e-5, t_end=1.0, output_times=[0.5])
    assert sol.times.tolist() == pytest.approx([0.0, 0.5, 1.0])
    for k in (1, 2):
        assert np.max(np.abs(sol.slice(k) - f0)) <= 1e-4


def test_fd_gaussian_advection_with_unit_diffusion():
    # a ≡ 1, b ≡ 1: F(t, x) = Φ((x − t)/√(1 + t))
    x = np.arange(-8.0, 10.0 + 1e-9, 0.02)
    sol = fd_solve(viscous_conservation(1.0, [1.0]), x, stats.norm.cdf(x), dt=1e-4, t_end=1.0)
    exact = stats.norm.cdf((x - 1.0) / np.sqrt(2.0))
    assert np.max(np.abs(sol.slice(-1) - exact)) <= 2e-3


def test_semi_implicit_agrees_with_explicit():
    x = np.arange(-6.0, 6.0 + 1e-9, 0.02)
    f0 = stats.norm.cdf(x)
    explicit = fd_solve(LOGISTIC, x, f0, dt=1e-4, t_end=0.5)
    implicit = fd_solve(LOGISTIC, x, f0, dt=1e-3, t_end=0.5, scheme="semi_implicit")
    assert np.max(np.abs(explicit.slice(-1) - implicit.slice(-1))) <= 1e-2
    assert np.all(np.diff(implicit.slice(-1)) >= -1e-10)


def test_grid_quantiles_of_uniform():
    x = np.linspace(0.0, 1.0, 101)
    sol = fd_solve(LOGISTIC, x, x.copy(), dt=1e-5, t_end=0.0)
    prof = grid_quantiles(sol, 0, [0.25, 0.5, 0.9])
    assert prof.values.tolist() == pytest.approx([0.25, 0.5, 0.9], abs=1e-12)


def test_quantile_solver_keeps_stationary_profile():
    start = stationary_cdf(LOGISTIC).quantile_profile()
    sol = quantile_pde_solve(LOGISTIC, start, dt=1e-3, t_end=1.0, m=128, output_times=[0.5])
    assert sol.times.tolist() == pytest.approx([0.0, 0.5, 1.0])
    for k in (1, 2):
        assert np.max(np.abs(sol.values[k] - sol.values[0])) <= 1e-4
        assert np.all(np.diff(sol.values[k]) > 0)


def test_quantile_solver_moves_pure_transport_rigidly():
    transport = from_callables(
        "transport",
        lambda u: np.zeros_like(u),
        lambda u: np.ones_like(u),
        A=lambda u: np.zeros_like(u),
        B=lambda u: np.asarray(u, dtype=float),
    )
    sol = quantile_pde_solve(transport, GAUSS, dt=1e-2, t_end=1.0, m=64)
    assert np.max(np.abs(sol.values[-1] - sol.values[0] - 1.0)) <= 1e-10


def test_quantile_solver_step_floor_follows_dt():
    # вузли зустрічаються при t ≈ 0.25, далі крок ділиться до порогу
    converging = from_callables(
        "converging",
        lambda u: np.zeros_like(u),
        lambda u: -10.0 * np.asarray(u, dtype=float),
        A=lambda u: np.zeros_like(u),
        B=lambda u: -5.0 * np.asarray(u, dtype=float) ** 2,
    )
    floor = f"порогу {0.1 / 2**DT_FLOOR_EXPONENT:.3g}"
    for m in (16, 32):
        with pytest.raises(RuntimeError, match=floor):
            quantile_pde_solve(converging, GAUSS, dt=0.1, t_end=1.0, m=m)


def test_quantile_solver_input_checks():
    with pytest.raises(ValueError):
        quantile_pde_solve(LOGISTIC, StepCDF.dirac(0.0), dt=1e-3, t_end=0.1, m=16)
    with pytest.raises(ValueError):
        quantile_pde_solve(LOGISTIC, GAUSS, dt=1e-3, t_end=0.1, m=2)
    with pytest.raises(ValueError):
        quantile_pde_solve(LOGISTIC, GAUSS, dt=1e-3, t_end=0.1, boundary="periodic")
    with pytest.raises(ValueError):
        quantile_pde_solve(LOGISTIC, GAUSS, dt=1e-3, t_end=0.1, flux="upwind")
    with pytest.raises(ValueError):
        quantile_pde_solve(porous_medium(2.0), GAUSS, dt=1e-3, t_end=0.1, flux="balanced")
    assert quantile_grid(3).tolist() == [0.25, 0.5, 0.75]


def test_dissipation_rate_basics():
    prof = QuantileProfile(quantile_grid(9), np.linspace(-1.0, 1.0, 9))
    assert dissipation_rate(prof, prof, 2.0, model=LOGISTIC) == 0.0
    steeper = QuantileProfile(prof.grid, 2.0 * prof.values)
    assert dissipation_rate(prof, steeper, 2.0, model=LOGISTIC) > 0
    with pytest.raises(ValueError):
        dissipation_rate(prof, prof, 1.5, model=LOGISTIC)
    with pytest.raises(ValueError):
        dissipation_rate(prof, prof, 2.0)


def test_dissipation_rate_of_linear_profiles():
    u = quantile_grid(999)
    flat, steep = QuantileProfile(u, u.copy()), QuantileProfile(u, 2.0 * u)
    rate = dissipation_rate(flat, steep, 2.0, a=lambda v: np.ones_like(v))
    assert rate == pytest.approx(0.5, abs=2e-3)


def test_dissipation_identity_holds():
    wider = QuantileProfile.from_function(lambda u: 2.0 * stats.norm.ppf(u), lower="divergent", upper="divergent")
    report = dissipation_identity_check(LOGISTIC, GAUSS, wider, p=2.0, dt=1e-3, t1=0.05, t2=0.5, m=128, samples=100)
    assert report.lhs < 0
    assert report.rel_err <= 0.05
    assert report.times.size == 101
    with pytest.raises(ValueError):
        dissipation_identity_check(LOGISTIC, GAUSS, wider, p=2.0, t1=0.6, t2=0.5)


def test_fd_and_quantile_solvers_agree():
    x = np.arange(-6.0, 6.0 + 1e-9, 0.02)
    fd = fd_solve(LOGISTIC, x, stats.norm.cdf(x), dt=1e-4, t_end=1.0)
    qs = quantile_pde_solve(LOGISTIC, GAUSS, dt=1e-3, t_end=1.0, m=256)
    u = np.linspace(0.1, 0.9, 17)
    from_fd = grid_quantiles(fd, -1)(u)
    from_quantiles = qs.profile(-1)(u)
    assert np.max(np.abs(from_fd - from_quantiles)) <= 1e-2


def test_weighted_l2():
    x = np.linspace(0.0, 1.0, 11)
    assert weighted_l2(np.full(11, 0.1), np.zeros(11), np.ones(11), x) == pytest.approx(0.01)
    assert weighted_l2(lambda v: v, lambda v: v, lambda v: np.ones_like(v), x) == 0.0


def test_w2_bounded_by_weighted_l2_to_logistic():
    logistic = QuantileProfile.from_function(
        lambda u: 0.5 * np.log(np.asarray(u) / (1.0 - np.asarray(u))), lower="divergent", upper="divergent"
    )
    x = np.linspace(-15.0, 15.0, 30001)
    density = 2.0 * _logistic_cdf(x) * (1.0 - _logistic_cdf(x))
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(1, 6))
        G = StepCDF.from_atoms(rng.normal(scale=2.0, size=k), rng.dirichlet(np.ones(k)))
        w2 = wasserstein_pp_quantile(logistic, G, 2.0)
        assert w2 <= 4.0 * weighted_l2(_logistic_cdf, G, density, x) * (1.0 + 1e-2)
    with pytest.raises(ValueError):
        weighted_l2(np.zeros(11), np.zeros(11), np.zeros(11), x)


def test_truncated_domain():
    assert truncated_domain(stats.norm.cdf, 1e-8) == (-6.0, 6.0)
    with pytest.raises(ValueError):
        truncated_domain(lambda x: 0.5, 1e-8, max_extent=10.0)
