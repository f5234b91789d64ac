"""Диспетчер сценаріїв: назва зі ScenarioConfig → функція ``run``."""

from __future__ import annotations

import time
from pathlib import Path
from typing import Callable

from setup_logger import setup_logger

from . import chaos, contraction, dissipation, equilibrium, stationary_audit
from .config import ScenarioConfig
from .pool import ScenarioResult

logger = setup_logger(__name__)

Runner = Callable[[ScenarioConfig, Path, int], ScenarioResult]

RUNNERS: dict[str, Runner] = {
    "contraction": contraction.run,
    "equilibrium": equilibrium.run,
    "chaos": chaos.run,
    "dissipation": dissipation.run,
    "stationary_audit": stationary_audit.run,
}


def run_scenario(config: ScenarioConfig, out_dir: Path, workers: int = 1) -> ScenarioResult:
    try:
        runner = RUNNERS[config.scenario]
    except KeyError as exc:
        raise ValueError(f"для сценарію {config.scenario!r} немає виконавця") from exc
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"Сценарій {config.scenario}: модель {config.model.name}, зерно {config.seed}, процесів {workers}")
    started = time.perf_counter()
    result = runner(config, out_dir, workers)
    logger.info(f"Сценарій {config.scenario} завершено за {time.perf_counter() - started:.1f} с, файлів: {len(result.files)}")
    return result
