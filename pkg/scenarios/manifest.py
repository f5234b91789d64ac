"""manifest.json поруч з артефактами прогону."""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path
from typing import Any

from quasilinear import __version__

from .config import ScenarioConfig

MANIFEST_NAME = "manifest.json"


def write_manifest(
    out_dir: Path,
    config: ScenarioConfig,
    files: list[Path],
    summary: dict[str, Any],
    status: str = "completed",
) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    body = {
        "scenario": config.scenario,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
        "created_at": datetime.now().isoformat(timespec="seconds"),
        "status": status,
        "files": sorted(Path(f).name for f in files),
        "summary": summary,
        "config": config.to_dict(),
    }
    path.write_text(json.dumps(body, ensure_ascii=False, indent=2, default=list) + "\n", encoding="utf-8")
    return path


def read_manifest(out_dir: Path) -> dict[str, Any] | None:
    try:
        return json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
    except (FileNotFoundError, ValueError):
        return None
