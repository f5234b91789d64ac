"""Сценарій chaos: W₁(μⁿ_T, F^fd_T) має спадати зі зростанням n."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quasilinear.measure import QuantileProfile, wasserstein_pp_samples_vs_profile, write_csv
from quasilinear.particle import simulate
from quasilinear.pde import fd_solve, grid_quantiles, truncated_domain
from setup_logger import setup_logger

from .config import ScenarioConfig
from .pool import ScenarioResult, fan_out

logger = setup_logger(__name__)

DEFAULT_N_LIST = (100, 1000, 10000)


@dataclass(frozen=True)
class Reference:
    grid: np.ndarray
    values: np.ndarray


def build_reference(config: ScenarioConfig) -> Reference:
    """Квантилі розв'язку fd_solve у момент t_end."""
    model = config.model.build()
    F0 = config.initial.cdf(model)
    pde = config.pde
    if pde.x_min is not None and pde.x_max is not None:
        x_min, x_max = pde.x_min, pde.x_max
    else:
        x_min, x_max = truncated_domain(F0, pde.truncation_tol)
    x = np.arange(x_min, x_max + 0.5 * pde.dx, pde.dx)
    a_max = model.a_max()
    dt = pde.dt or (0.45 * pde.dx**2 / a_max if a_max > 0 else pde.dx)
    t_end = config.particle.t_end
    sol = fd_solve(model, x, np.asarray(F0(x), dtype=float), dt, t_end, pde.scheme)
    profile = grid_quantiles(sol, -1)
    logger.info(f"еталон fd_solve: [{x_min:g}, {x_max:g}], {x.size} вузлів, dt={dt:.3g}")
    return Reference(profile.grid, profile.values)


def run_point(config: ScenarioConfig, n: int, seed: int, ref: Reference) -> tuple[int, int, float]:
    model = config.model.build()
    profile = QuantileProfile(ref.grid, ref.values)
    sim = config.particle.sim_config(seed, n=n, snapshot_times=(config.particle.t_end,))
    series = simulate(model, config.initial.quantile(model), sim)
    return n, seed, wasserstein_pp_samples_vs_profile(series.final.positions, profile, 1.0)


def run(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    ref = build_reference(config)
    n_list = config.particle.n_list or DEFAULT_N_LIST
    tasks = [(config, n, s, ref) for n in n_list for s in config.seeds()]
    runs = fan_out(run_point, tasks, workers)

    result = ScenarioResult()
    result.files.append(write_csv(out_dir / "chaos_runs.csv", ("n", "seed", "w1"), runs))
    means = [(n, float(np.mean([w for m, _, w in runs if m == n]))) for n in n_list]
    result.files.append(write_csv(out_dir / "chaos.csv", ("n", "mean_w1"), means))

    values = [w for _, w in means]
    if any(b >= a for a, b in zip(values[:-1], values[1:])):
        logger.warning(f"середня W₁ не спадає строго по n: {values}")
    result.summary = {"mean_w1": {str(n): w for n, w in means}}
    return result
