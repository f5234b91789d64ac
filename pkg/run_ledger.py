"""SQLite журнал прогонів сценаріїв.

Кожен виклик ``main.py run`` додає рядок зі статусом 'new', який після
завершення стає 'completed' або 'failed' (з текстом помилки).
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from setup_logger import setup_logger

logger = setup_logger(__name__)

LEDGER_NAME = "runs.db"


@dataclass(frozen=True)
class RunRecord:
    """Один запис прогону з журналу."""

    id: int
    scenario: str
    config_path: str | None
    config_hash: str
    seed: int
    status: str
    output_dir: str
    summary: dict
    errors: str | None
    created_at: str
    updated_at: str


def _row_to_record(row: sqlite3.Row) -> RunRecord:
    return RunRecord(
        id=row["id"],
        scenario=row["scenario"],
        config_path=row["config_path"],
        config_hash=row["config_hash"],
        seed=row["seed"],
        status=row["status"],
        output_dir=row["output_dir"],
        summary=json.loads(row["summary"]) if row["summary"] else {},
        errors=row["errors"],
        created_at=row["created_at"],
        updated_at=row["updated_at"],
    )


class RunLedger:
    """Тонка обгортка навколо SQLite для журналу прогонів."""

    def __init__(self, db_path: Path) -> None:
        self.db_path = Path(db_path)
        self.conn: sqlite3.Connection | None = None

    def __enter__(self) -> RunLedger:
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.conn = sqlite3.connect(str(self.db_path))
        self.conn.row_factory = sqlite3.Row
        self.conn.execute("PRAGMA journal_mode=WAL")
        self._create_tables()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self.conn:
            self.conn.close()
            self.conn = None

    def _create_tables(self) -> None:
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id              INTEGER PRIMARY KEY AUTOINCREMENT,
                scenario        TEXT NOT NULL,
                config_path     TEXT,
                config_hash     TEXT NOT NULL,
                seed            INTEGER NOT NULL,
                status          TEXT NOT NULL DEFAULT 'new'
                                CHECK(status IN ('new', 'completed', 'failed')),
                output_dir      TEXT NOT NULL,
                summary         TEXT NOT NULL DEFAULT '{}',
                errors          TEXT,
                created_at      TEXT NOT NULL DEFAULT (datetime('now', 'localtime')),
                updated_at      TEXT NOT NULL DEFAULT (datetime('now', 'localtime'))
            )
        """)
        self.conn.commit()

    def start_run(
        self,
        scenario: str,
        config_hash: str,
        seed: int,
        output_dir: str | Path,
        config_path: str | Path | None = None,
    ) -> int:
        cur = self.conn.execute(
            """INSERT INTO runs (scenario, config_path, config_hash, seed, output_dir)
               VALUES (?, ?, ?, ?, ?)""",
            (scenario, str(config_path) if config_path else None, config_hash, seed, str(output_dir)),
        )
        self.conn.commit()
        logger.debug("Прогін #%d (%s, seed=%d) зареєстровано", cur.lastrowid, scenario, seed)
        return cur.lastrowid

    def mark_completed(self, run_id: int, summary: dict[str, Any] | None = None) -> None:
        self.conn.execute(
            """UPDATE runs
               SET status = 'completed', summary = ?, errors = NULL,
                   updated_at = datetime('now', 'localtime')
               WHERE id = ?""",
            (json.dumps(summary or {}, ensure_ascii=False, default=str), run_id),
        )
        self.conn.commit()
        logger.info("Прогін #%d позначено як завершений", run_id)

    def mark_failed(self, run_id: int, error: str) -> None:
        self.conn.execute(
            """UPDATE runs
               SET status = 'failed', errors = ?,
                   updated_at = datetime('now', 'localtime')
               WHERE id = ?""",
            (error, run_id),
        )
        self.conn.commit()
        logger.warning("Прогін #%d позначено як помилковий", run_id)

    def get_run(self, run_id: int) -> RunRecord | None:
        row = self.conn.execute("SELECT * FROM runs WHERE id = ?", (run_id,)).fetchone()
        return _row_to_record(row) if row else None

    def list_runs(self, limit: int | None = None, scenario: str | None = None) -> list[RunRecord]:
        """Останні прогони першими."""
        query = "SELECT * FROM runs WHERE 1=1"
        params: list[Any] = []
        if scenario:
            query += " AND scenario = ?"
            params.append(scenario)
        query += " ORDER BY id DESC"
        if limit:
            query += " LIMIT ?"
            params.append(limit)
        return [_row_to_record(r) for r in self.conn.execute(query, params).fetchall()]

    def summary(self) -> dict[str, int]:
        rows = self.conn.execute("SELECT status, COUNT(*) as cnt FROM runs GROUP BY status").fetchall()
        return {r["status"]: r["cnt"] for r in rows}
