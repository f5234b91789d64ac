"""Regression tests for setup_logger name resolution.

A package whose name merely starts with ``APP_NAME`` (``quasilinear_tools`` vs
``quasilinear``) is a separate hierarchy and must still be prefixed, otherwise
its records never reach the base logger handlers.
"""

from __future__ import annotations

import logging

import setup_logger as sl_mod
from setup_logger import setup_logger


def test_lookalike_package_is_prefixed_under_base(monkeypatch):
    monkeypatch.setattr(sl_mod, "APP_NAME", "quasilinear")
    lg = setup_logger("quasilinear_tools.plots")
    assert lg.name == "quasilinear.quasilinear_tools.plots"


def test_lookalike_package_propagates_to_base_handler(monkeypatch):
    monkeypatch.setattr(sl_mod, "APP_NAME", "quasilinear")
    base = logging.getLogger("quasilinear")
    base.setLevel(logging.DEBUG)

    captured: list[logging.LogRecord] = []

    class _Capture(logging.Handler):
        def emit(self, record):
            captured.append(record)

    handler = _Capture()
    base.addHandler(handler)
    try:
        lg = setup_logger("quasilinear_tools.plots")
        lg.setLevel(logging.NOTSET)
        lg.warning("plot message")
    finally:
        base.removeHandler(handler)

    assert any(r.getMessage() == "plot message" for r in captured)


def test_scenario_modules_are_prefixed(monkeypatch):
    monkeypatch.setattr(sl_mod, "APP_NAME", "quasilinear")
    assert setup_logger("__main__").name == "quasilinear.__main__"
    assert setup_logger("scenarios.contraction").name == "quasilinear.scenarios.contraction"
    assert setup_logger("run_ledger").name == "quasilinear.run_ledger"


def test_package_modules_not_doubled(monkeypatch):
    monkeypatch.setattr(sl_mod, "APP_NAME", "quasilinear")
    assert setup_logger("quasilinear.particle").name == "quasilinear.particle"
    assert setup_logger("quasilinear").name == "quasilinear"


def test_empty_app_name_leaves_name_untouched(monkeypatch):
    monkeypatch.setattr(sl_mod, "APP_NAME", "")
    assert setup_logger("foo.bar").name == "foo.bar"
