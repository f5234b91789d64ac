"""Розподіл незалежних прогонів (зерна, точки n) між процесами."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from setup_logger import setup_logger

logger = setup_logger(__name__)


@dataclass
class ScenarioResult:
    files: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def workers_from_env(default: int = 1) -> int:
    raw = os.getenv("QUASILINEAR_WORKERS", "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"QUASILINEAR_WORKERS={raw!r} не є цілим, використовую {default}")
        return default
    return max(value, 1)


def fan_out(fn: Callable[..., Any], tasks: Sequence[tuple], workers: int = 1) -> list[Any]:
    """Результати в порядку ``tasks``; ``fn`` має бути функцією верхнього рівня модуля."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    logger.info(f"{len(tasks)} задач на {workers} процесах")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *task) for task in tasks]
        return [f.result() for f in futures]
