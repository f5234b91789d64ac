"""Тест контекстного файлового хендлера extra_file_handler (run.log прогону)."""

from __future__ import annotations

import logging

from setup_logger import APP_NAME, extra_file_handler, setup_logger


def test_extra_file_handler_writes_then_cleans_up(tmp_path):
    log_path = tmp_path / "run.log"
    base = logging.getLogger(APP_NAME)
    handlers_before = len(base.handlers)
    logger = setup_logger("scenarios.test_extra_handler")

    with extra_file_handler(log_path) as path:
        assert path == log_path
        assert len(base.handlers) == handlers_before + 1
        logger.warning("повідомлення-у-run-log")

    assert len(base.handlers) == handlers_before
    assert "повідомлення-у-run-log" in log_path.read_text(encoding="utf-8")


def test_extra_file_handler_creates_parent_dir(tmp_path):
    log_path = tmp_path / "results" / "chaos_seed0.partial" / "run.log"
    with extra_file_handler(log_path):
        pass
    assert log_path.parent.is_dir()


def test_records_after_exit_not_written(tmp_path):
    log_path = tmp_path / "run.log"
    logger = setup_logger("scenarios.test_extra_handler")
    with extra_file_handler(log_path, level="WARNING"):
        logger.warning("всередині")
    logger.warning("після")
    text = log_path.read_text(encoding="utf-8")
    assert "всередині" in text
    assert "після" not in text


def test_init_logging_clears_old_files_once(tmp_path):
    from setup_logger import init_logging

    log_path = tmp_path / "quasilinear.log"
    backup = tmp_path / "quasilinear.log.1"
    log_path.write_text("старий запис\n", encoding="utf-8")
    backup.write_text("старий бекап\n", encoding="utf-8")

    base = init_logging("INFO", str(log_path), clear_on_start=True)
    try:
        count = len(base.handlers)
        init_logging("DEBUG", str(log_path))
        assert len(base.handlers) == count
        assert base.level == logging.DEBUG
        assert "старий" not in log_path.read_text(encoding="utf-8")
        assert not backup.exists()
    finally:
        for h in list(base.handlers):
            if getattr(h, "baseFilename", None) == str(log_path.resolve()):
                base.removeHandler(h)
                h.close()
        base.setLevel(logging.INFO)
