"""Сценарії експериментів над рівнянням та системою частинок."""

from .config import SCENARIOS, ScenarioConfig, load_config, parse_config
from .manifest import write_manifest
from .pool import ScenarioResult, workers_from_env
from .runner import RUNNERS, run_scenario

__all__ = [
    "RUNNERS",
    "SCENARIOS",
    "ScenarioConfig",
    "ScenarioResult",
    "load_config",
    "parse_config",
    "run_scenario",
    "workers_from_env",
    "write_manifest",
]
