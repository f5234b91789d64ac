"""Сценарій dissipation: перевірка тотожності для d/dt W_p^p на квантильному розв'язувачі."""

from __future__ import annotations

from pathlib import Path

from quasilinear.pde import dissipation_identity_check
from setup_logger import setup_logger

from .config import ScenarioConfig
from .pool import ScenarioResult

logger = setup_logger(__name__)


def run(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    model = config.model.build()
    pde = config.pde
    p = max(config.p_list) if config.p_list else 2.0
    report = dissipation_identity_check(
        model,
        config.initial.quantile(model),
        config.initial_g.quantile(model),
        p=p,
        dt=pde.quantile_dt,
        t1=pde.t1,
        t2=pde.t2,
        m=pde.m,
        samples=pde.samples,
    )
    if report.rel_err > config.max_rel_err:
        logger.warning(f"відносна похибка тотожності {report.rel_err:.3g} > {config.max_rel_err:g}")
    files = [report.to_csv(out_dir / "dissipation.csv"), report.series_to_csv(out_dir / "dissipation_series.csv")]
    return ScenarioResult(files, {"lhs": report.lhs, "rhs": report.rhs, "rel_err": report.rel_err})
