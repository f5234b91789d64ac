"""Запуск експериментів над ранговою системою частинок та квазілінійним рівнянням.

Кожен прогін описується одним JSON-файлом (див. configs/), результати
потрапляють у окрему теку разом з manifest.json та run.log, а сам прогін
реєструється в журналі runs.db у корені результатів.

Використання:
  python main.py run configs/contraction.json                 # тека results/contraction_seed0
  python main.py run configs/equilibrium.json --seed 7
  python main.py run configs/chaos.json --out results/chaos_big
  python main.py runs                                          # останні прогони з журналу
  python main.py runs --limit 5
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import traceback
from pathlib import Path

from dotenv import load_dotenv

from setup_logger import extra_file_handler, init_logging, setup_logger

load_dotenv()

RUN_LOG_NAME = "run.log"
STAGING_SUFFIX = ".partial"

init_logging(
    level=os.getenv("LOG_LEVEL", "INFO"),
    filename=os.getenv("QUASILINEAR_LOG_FILE") or None,
)
logger = setup_logger(__name__)


def output_root() -> Path:
    return Path(os.getenv("QUASILINEAR_OUTPUT_DIR", "results"))


def resolve_out_dir(config, out: str | None) -> Path:
    """Пріоритет: --out, потім output_dir з конфігурації, потім <root>/<сценарій>_seed<N>."""
    if out:
        return Path(out)
    if config.output_dir:
        return Path(config.output_dir)
    return output_root() / f"{config.scenario}_seed{config.seed}"


def _prepare_target(out_dir: Path) -> Path:
    """Тека для проміжних файлів; наявну теку результатів можна замінити лише попередній прогін."""
    from scenarios.manifest import MANIFEST_NAME

    if out_dir.exists() and any(out_dir.iterdir()) and not (out_dir / MANIFEST_NAME).exists():
        raise ValueError(f"тека {out_dir} не порожня і не є результатом попереднього прогону")
    staging = out_dir.with_name(out_dir.name + STAGING_SUFFIX)
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    return staging


def _promote(staging: Path, out_dir: Path) -> None:
    if out_dir.exists():
        shutil.rmtree(out_dir)
    staging.rename(out_dir)


def phase_run(config_path: str, out: str | None = None, seed: int | None = None) -> Path:
    """Один прогін сценарію. Повертає теку з результатами."""
    from run_ledger import LEDGER_NAME, RunLedger
    from scenarios import load_config, run_scenario, workers_from_env, write_manifest

    config = load_config(config_path).with_overrides(seed=seed)
    out_dir = resolve_out_dir(config, out)
    workers = workers_from_env()

    with RunLedger(output_root() / LEDGER_NAME) as ledger:
        run_id = ledger.start_run(config.scenario, config.config_hash(), config.seed, out_dir, config_path)
        try:
            staging = _prepare_target(out_dir)
            with extra_file_handler(staging / RUN_LOG_NAME):
                logger.info(f"Прогін #{run_id}: {config_path} → {out_dir} (хеш {config.config_hash()[:12]})")
                result = run_scenario(config, staging, workers)
                write_manifest(staging, config, result.files, result.summary)
            _promote(staging, out_dir)
        except BaseException as exc:
            ledger.mark_failed(run_id, "".join(traceback.format_exception_only(type(exc), exc)).strip())
            raise
        ledger.mark_completed(run_id, result.summary)

    logger.info(f"Результати: {out_dir}")
    return out_dir


def phase_list_runs(limit: int | None = None) -> None:
    from run_ledger import LEDGER_NAME, RunLedger

    db_path = output_root() / LEDGER_NAME
    if not db_path.exists():
        logger.info(f"Журнал {db_path} ще не створено")
        return
    with RunLedger(db_path) as ledger:
        for rec in ledger.list_runs(limit=limit):
            line = f"#{rec.id:<4} {rec.created_at}  {rec.scenario:<16} seed={rec.seed:<4} {rec.status:<9} {rec.output_dir}"
            if rec.errors:
                line += f"  ({rec.errors.splitlines()[-1]})"
            logger.info(line)
        logger.info(f"=== Зведення журналу: {ledger.summary()} ===")


# ── CLI ──────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    # --debug приймається і до, і після підкоманди; у підпарсерах SUPPRESS,
    # щоб відсутній прапорець не перетирав уже розібране значення.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", action="store_true", default=argparse.SUPPRESS, help="Enable debug logging")

    parser = argparse.ArgumentParser(
        description="Rank-based particle schemes for quasilinear parabolic equations",
    )
    parser.add_argument("--debug", action="store_true", default=False, help="Enable debug logging")

    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="Run one scenario from a JSON config")
    p_run.add_argument("config", help="Path to scenario JSON config")
    p_run.add_argument("--out", help="Output directory (overrides config and QUASILINEAR_OUTPUT_DIR)")
    p_run.add_argument("--seed", type=int, help="Master seed override")

    p_runs = sub.add_parser("runs", parents=[common], help="List recorded runs")
    p_runs.add_argument("--limit", type=int, default=20, help="Max runs to show")

    return parser


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.debug:
        init_logging(level="DEBUG", filename=os.getenv("QUASILINEAR_LOG_FILE") or None)

    try:
        if args.command == "run":
            phase_run(args.config, out=args.out, seed=args.seed)
        elif args.command == "runs":
            phase_list_runs(limit=args.limit)
    except KeyboardInterrupt:
        logger.info("Перервано користувачем")
        sys.exit(1)
    except Exception:
        logger.exception("Критична помилка")
        sys.exit(1)


if __name__ == "__main__":
    main()
