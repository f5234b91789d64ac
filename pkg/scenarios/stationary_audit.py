"""Сценарій stationary_audit: звіт умов, таблиці Ψ та F_∞, критерій Харді."""

from __future__ import annotations

import math
from pathlib import Path

from quasilinear.measure import write_csv
from quasilinear.model import check_conditions
from quasilinear.stationary import export_profile, hardy_poincare_check, stationary_first_moment, stationary_profile
from setup_logger import setup_logger

from .config import ScenarioConfig
from .pool import ScenarioResult

logger = setup_logger(__name__)


def run(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    model = config.model.build()
    report = check_conditions(model)
    result = ScenarioResult()
    result.files.append(write_csv(out_dir / "conditions.csv", ("condition", "status", "witness"), report.rows()))
    result.summary = {key: status for key, status, _ in report.rows()}

    if not report.e1.holds:
        logger.warning(f"{model.name}: E1 {report.e1.status}, стаціонарної родини немає, таблиці Ψ не створюю")
        return result

    result.files.extend(export_profile(stationary_profile(model), out_dir))
    moment = stationary_first_moment(model)
    hardy = hardy_poincare_check(model)
    rows = [
        (side, getattr(hardy, side).status, depth, value)
        for side in ("left", "right")
        for depth, value in zip((20, 30, 40), getattr(hardy, side).partial_sups)
    ]
    result.files.append(write_csv(out_dir / "hardy.csv", ("side", "status", "depth", "partial_sup"), rows))
    result.summary.update(
        {
            "first_abs_moment": moment if math.isfinite(moment) else None,
            "hardy": hardy.status,
        }
    )
    logger.info(f"{model.name}: ∫|x|dF_∞ = {moment:.6g}, критерій Харді: {hardy.status}")
    return result
