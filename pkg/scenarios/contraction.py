"""Сценарій contraction: W_p^p між зчепленими впорядкованими системами не зростає на жодному кроці."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quasilinear.measure import write_csv
from quasilinear.particle import coupled_contraction_run
from setup_logger import setup_logger

from .config import ScenarioConfig
from .pool import ScenarioResult, fan_out

logger = setup_logger(__name__)

HEADER = ("t", "p", "wpp")


@dataclass(frozen=True)
class SeedContraction:
    seed: int
    rows: list[tuple[float, float, float]]
    max_increase: dict[float, float]


def run_seed(config: ScenarioConfig, seed: int) -> SeedContraction:
    model = config.model.build()
    F0 = config.initial.quantile(model)
    G0 = config.initial_g.quantile(model)
    table = coupled_contraction_run(model, F0, G0, config.particle.sim_config(seed), config.p_list)
    return SeedContraction(seed, table.rows(), {p: table.max_increase(p) for p in config.p_list})


def run(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    results = fan_out(run_seed, [(config, s) for s in config.seeds()], workers)
    result = ScenarioResult()
    for r in results:
        result.files.append(write_csv(out_dir / f"contraction_seed{r.seed}.csv", HEADER, r.rows))

    stacked = np.array([[row[2] for row in r.rows] for r in results])
    keys = [(row[0], row[1]) for row in results[0].rows]
    mean_rows = [(t, p, float(v)) for (t, p), v in zip(keys, stacked.mean(axis=0))]
    result.files.append(write_csv(out_dir / "contraction.csv", HEADER, mean_rows))

    worst = {p: max(r.max_increase[p] for r in results) for p in config.p_list}
    result.summary = {
        "seeds": len(results),
        "worst_step_increase": {f"{p:g}": (v if math.isfinite(v) else None) for p, v in worst.items()},
    }
    violations = [(r.seed, p, v) for r in results for p, v in r.max_increase.items() if v > 0]
    if violations:
        seed, p, v = violations[0]
        raise RuntimeError(f"порушено покрокове стискання: зерно {seed}, p={p:g}, перевищення {v:.3g}")
    logger.info(f"стискання виконується на кожному кроці для {len(results)} зерен")
    return result
