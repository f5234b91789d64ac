"""Тести функцій розподілу, квантилів та відстаней Вассерштейна."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from quasilinear.measure import (
    QuantileProfile,
    StepCDF,
    chebyshev_grid,
    fmt,
    quantile,
    read_csv,
    tail_fn,
    wasserstein_pp_double_integral,
    wasserstein_pp_quantile,
    wasserstein_pp_samples_vs_profile,
    wasserstein_pp_sorted,
    write_csv,
)


def _random_step(rng: np.random.Generator, max_atoms: int = 8) -> StepCDF:
    k = int(rng.integers(1, max_atoms + 1))
    return StepCDF.from_atoms(rng.normal(scale=2.0, size=k), rng.dirichlet(np.ones(k)))


def test_step_cdf_merges_duplicates_and_sorts():
    F = StepCDF.from_atoms([1.0, -1.0, 1.0], [0.25, 0.5, 0.25])
    assert F.locations.tolist() == [-1.0, 1.0]
    assert F.masses.tolist() == [0.5, 0.5]
    assert not F.locations.flags.writeable


def test_step_cdf_evaluation_and_quantile():
    F = StepCDF.from_atoms([0.0, 1.0], [0.5, 0.5])
    assert F(-1.0) == 0.0
    assert F(0.0) == 0.5
    assert F(0.5) == 0.5
    assert F(1.0) == 1.0
    assert F.quantile(0.25) == 0.0
    assert F.quantile(0.5) == 1.0  # inf{x : F(x) > u}
    assert F.quantile(0.75) == 1.0
    assert F.mean() == pytest.approx(0.5)


def test_step_cdf_rejects_bad_masses():
    with pytest.raises(ValueError):
        StepCDF(np.array([0.0, 1.0]), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        StepCDF(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        StepCDF(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        StepCDF.from_samples([])


def test_quantile_requires_open_unit_interval():
    F = StepCDF.dirac(0.0)
    with pytest.raises(ValueError):
        quantile(F, 0.0)
    with pytest.raises(ValueError):
        quantile(F, [0.5, 1.0])


def test_chebyshev_grid_contains_half():
    g = chebyshev_grid(2048)
    assert g.size == 2047
    assert g[1023] == 0.5
    assert np.all(np.diff(g) > 0)
    assert 0.0 < g[0] < 1e-6


def test_wasserstein_between_diracs():
    for p in (1.0, 2.0, 3.0):
        assert wasserstein_pp_quantile(StepCDF.dirac(0.0), StepCDF.dirac(2.0), p) == pytest.approx(2.0**p)


def test_double_integral_matches_quantile_formula():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        F, G = _random_step(rng), _random_step(rng)
        p = float(rng.choice([2.0, 3.0, 4.0]))
        exact = wasserstein_pp_quantile(F, G, p)
        assert wasserstein_pp_double_integral(F, G, p) == pytest.approx(exact, rel=1e-8, abs=1e-12)


def test_double_integral_requires_p_above_one():
    with pytest.raises(ValueError):
        wasserstein_pp_double_integral(StepCDF.dirac(0.0), StepCDF.dirac(1.0), 1.0)


def test_shifted_gaussians_have_unit_distance():
    F = QuantileProfile.from_function(stats.norm.ppf, lower="divergent", upper="divergent")
    G = F.shifted(1.0)
    assert wasserstein_pp_quantile(F, G, 2.0) == pytest.approx(1.0, rel=1e-8)


def test_scaled_gaussians_w2():
    F = QuantileProfile.from_function(stats.norm.ppf, lower="divergent", upper="divergent")
    G = QuantileProfile.from_function(lambda u: 2.0 * stats.norm.ppf(u), lower="divergent", upper="divergent")
    assert wasserstein_pp_quantile(F, G, 2.0) == pytest.approx(1.0, rel=1e-3)


def test_nonintegrable_tail_gives_infinity():
    cauchy = QuantileProfile.from_function(
        lambda u: np.tan(np.pi * (np.asarray(u) - 0.5)), lower="divergent", upper="divergent"
    )
    assert wasserstein_pp_quantile(cauchy, QuantileProfile.constant(0.0), 2.0) == math.inf


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_triangle_inequality_on_step_cdfs(p):
    rng = np.random.default_rng(int(10 * p))
    for _ in range(50):
        F, G, H = (_random_step(rng) for _ in range(3))
        d_fg = wasserstein_pp_quantile(F, G, p) ** (1 / p)
        d_gh = wasserstein_pp_quantile(G, H, p) ** (1 / p)
        d_fh = wasserstein_pp_quantile(F, H, p) ** (1 / p)
        assert d_fh <= d_fg + d_gh + 1e-12


def test_sorted_distance_is_permutation_invariant_and_below_pairing():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=50), rng.normal(size=50)
    value = wasserstein_pp_sorted(x, y, 2.0)
    assert value == pytest.approx(wasserstein_pp_sorted(rng.permutation(x), y, 2.0))
    assert value <= np.mean((x - y) ** 2)
    with pytest.raises(ValueError):
        wasserstein_pp_sorted(x, y[:10], 2.0)


def test_samples_vs_profile_single_sample():
    uniform = QuantileProfile.from_function(lambda u: np.asarray(u, dtype=float))
    assert wasserstein_pp_samples_vs_profile([0.5], uniform, 2.0) == pytest.approx(1.0 / 12.0, rel=1e-9)
    assert wasserstein_pp_samples_vs_profile([0.5], uniform, 1.0) == pytest.approx(0.25, rel=1e-9)


def test_samples_vs_profile_agrees_with_step_cdf():
    samples = np.array([-1.0, 0.0, 0.5, 2.0])
    G = StepCDF.from_atoms([-0.5, 1.0], [0.5, 0.5])
    exact = wasserstein_pp_quantile(StepCDF.from_samples(samples), G, 2.0)
    assert wasserstein_pp_samples_vs_profile(samples, G, 2.0) == pytest.approx(exact, rel=1e-9)


def test_quantile_profile_validation_and_interpolation():
    with pytest.raises(ValueError):
        QuantileProfile(np.array([0.25, 0.75]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        QuantileProfile(np.array([0.0, 0.5]), np.array([0.0, 1.0]))
    prof = QuantileProfile(np.array([0.25, 0.75]), np.array([0.0, 1.0]), "clamped", "divergent")
    assert prof(0.5) == pytest.approx(0.5)
    assert prof(0.1) == pytest.approx(0.0)  # clamped
    assert prof(0.95) == pytest.approx(1.4)  # лінійне продовження


def test_from_grid_cdf_inverts_tabulated_cdf():
    x = np.linspace(0.0, 2.0, 201)
    prof = QuantileProfile.from_grid_cdf(x, x / 2.0, grid=np.array([0.1, 0.5, 0.9]))
    assert prof.values == pytest.approx([0.2, 1.0, 1.8], abs=1e-12)


def test_profile_mean():
    prof = QuantileProfile.from_function(lambda u: np.asarray(u, dtype=float))
    assert prof.mean() == pytest.approx(0.5, abs=1e-9)
    gauss = QuantileProfile.from_function(lambda u: 0.3 + stats.norm.ppf(u), lower="divergent", upper="divergent")
    assert gauss.mean() == pytest.approx(0.3, abs=1e-7)


def test_tail_fn():
    assert tail_fn(stats.norm.cdf, 0.0) == 1.0
    assert tail_fn(stats.norm.cdf, 1.0) == pytest.approx(stats.norm.sf(1.0))
    assert tail_fn(stats.norm.cdf, -2.0) == pytest.approx(stats.norm.cdf(-2.0))


def test_csv_dialect(tmp_path):
    path = write_csv(tmp_path / "out" / "t.csv", ("t", "value"), [(0.1, 2), (1.0, 3)])
    text = path.read_text(encoding="utf-8")
    assert text.splitlines() == ["t,value", f"{fmt(0.1)},2", "1,3"]
    assert read_csv(path)[0]["value"] == "2"


def test_step_cdf_csv(tmp_path):
    F = StepCDF.from_atoms([0.1, -3.5, 7.25], [0.2, 0.3, 0.5])
    G = StepCDF.from_csv(F.to_csv(tmp_path / "atoms.csv"))
    assert G.locations.tolist() == F.locations.tolist()
    assert G.masses.tolist() == F.masses.tolist()
