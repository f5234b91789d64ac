"""Сценарій equilibrium: збіжність μⁿ_t до F_∞ з тим самим середнім, що й у F₀."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quasilinear.measure import StepCDF, wasserstein_pp_samples_vs_profile, write_csv
from quasilinear.particle import simulate
from quasilinear.pde import truncated_domain, weighted_l2
from quasilinear.stationary import centering_offset, stationary_cdf
from setup_logger import setup_logger

from .config import ScenarioConfig
from .pool import ScenarioResult, fan_out

logger = setup_logger(__name__)

HEADER = ("t", "w2", "weighted_l2")


@dataclass(frozen=True)
class Reference:
    xbar: float
    x_grid: np.ndarray
    cdf: np.ndarray
    density: np.ndarray


def build_reference(config: ScenarioConfig) -> Reference:
    model = config.model.build()
    xbar = centering_offset(model, config.initial.quantile(model))
    F_inf = stationary_cdf(model, xbar)
    x_min, x_max = truncated_domain(F_inf, config.pde.truncation_tol)
    x = np.arange(x_min, x_max + 0.5 * config.pde.dx, config.pde.dx)
    density = np.asarray(F_inf.density(x))
    keep = density > 0
    logger.info(f"{model.name}: x̄ = {xbar:.6g}, сітка для зваженої L² [{x_min:g}, {x_max:g}]")
    return Reference(xbar, x[keep], np.asarray(F_inf(x[keep])), density[keep])


def snapshot_times(config: ScenarioConfig) -> tuple[float, ...]:
    if config.particle.snapshot_times:
        return config.particle.snapshot_times
    return tuple(float(t) for t in range(0, int(math.floor(config.particle.t_end)) + 1))


def run_seed(config: ScenarioConfig, seed: int, ref: Reference) -> tuple[int, list[tuple[float, float, float]]]:
    model = config.model.build()
    profile = stationary_cdf(model, ref.xbar).quantile_profile(exact=False)
    series = simulate(model, config.initial.quantile(model), config.particle.sim_config(seed, snapshot_times=snapshot_times(config)))
    rows = []
    for ens in series.snapshots:
        w2 = math.sqrt(wasserstein_pp_samples_vs_profile(ens.positions, profile, 2.0))
        wl2 = weighted_l2(StepCDF.from_samples(ens.positions), ref.cdf, ref.density, ref.x_grid)
        rows.append((ens.time, w2, wl2))
    return seed, rows


def run(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    ref = build_reference(config)
    results = fan_out(run_seed, [(config, s, ref) for s in config.seeds()], workers)
    result = ScenarioResult()
    for seed, rows in results:
        result.files.append(write_csv(out_dir / f"equilibrium_seed{seed}.csv", HEADER, rows))

    times = [row[0] for row in results[0][1]]
    w2 = np.mean([[row[1] for row in rows] for _, rows in results], axis=0)
    wl2 = np.mean([[row[2] for row in rows] for _, rows in results], axis=0)
    result.files.append(write_csv(out_dir / "equilibrium.csv", HEADER, zip(times, w2, wl2)))

    late = [w for t, w in zip(times, w2) if t >= 1.0]
    rises = [(a, b) for a, b in zip(late[:-1], late[1:]) if b > a + config.trend_slack]
    if rises:
        logger.warning(f"W₂ зростає після t=1 понад допуск {config.trend_slack:g}: {rises[0][0]:.4g} → {rises[0][1]:.4g}")
    result.summary = {"xbar": ref.xbar, "final_w2": float(w2[-1]), "final_weighted_l2": float(wl2[-1])}
    logger.info(f"фінальна W₂ = {w2[-1]:.4g}")
    return result
