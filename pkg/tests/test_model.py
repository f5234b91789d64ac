"""Тести коефіцієнтних моделей та звіту умов."""

from __future__ import annotations

import math

import numpy as np
import pytest

from quasilinear.model import (
    antiderivative,
    builtin_from_spec,
    check_conditions,
    degenerate_demo,
    e2_integral,
    from_callables,
    from_polynomials,
    logistic_demo,
    make_builtin,
    porous_medium,
)


def test_logistic_demo_satisfies_all_conditions():
    report = check_conditions(logistic_demo(1.0))
    assert report.d1.holds and report.d2.holds and report.d3.holds
    assert report.e1.holds and report.e2.holds
    assert report.r1 and report.r2


def test_porous_medium_has_no_stationary_family():
    report = check_conditions(porous_medium(2))
    assert report.d3.status == "fails"  # a(0) = 0
    assert report.d2.holds
    assert report.d1.holds
    assert report.e1.status == "fails"
    assert report.r2


def test_porous_medium_smoothness_by_exponent():
    assert check_conditions(porous_medium(1.5)).r2 is False
    assert check_conditions(porous_medium(1.5)).r1 is True
    assert porous_medium(3).smoothness_declared == "C2a_C1b_Holder"


def test_degenerate_demo_conditions():
    report = check_conditions(degenerate_demo())
    assert report.d2.status == "fails"  # a(½) = 0
    assert report.d1.holds
    assert report.e1.status == "fails"  # B(½) = 0


def test_degenerate_demo_antiderivative_matches_quadrature():
    model = degenerate_demo()
    for u in (0.1, 0.37, 0.5, 0.81, 1.0):
        direct = from_callables("tab", model.a, model.b).A(u)
        assert model.A(u) == pytest.approx(direct, abs=1e-9)


def test_implication_chain_on_random_polynomials():
    rng = np.random.default_rng(7)
    for _ in range(40):
        c0, c2 = rng.uniform(0.0, 2.0, size=2)
        if rng.random() < 0.3:
            c0 = 0.0
        b = rng.normal(size=3)
        report = check_conditions(from_polynomials([c0, 0.0, c2], b))
        if report.d3.holds:
            assert report.d2.holds
        if report.d2.holds:
            assert report.d1.holds


def test_tabulated_antiderivative_without_closed_form():
    model = from_callables("exp", np.exp, lambda u: np.cos(u))
    assert not model.analytic_A and not model.analytic_B
    assert model.A(0.7) == pytest.approx(math.exp(0.7) - 1.0, abs=1e-10)
    assert antiderivative(model, "A", 0.7) == pytest.approx(math.exp(0.7) - 1.0, abs=1e-10)
    assert antiderivative(model, "B", 1.0) == pytest.approx(math.sin(1.0), abs=1e-10)


def test_analytic_antiderivative_is_used():
    model = logistic_demo(2.0)
    assert antiderivative(model, "A", 0.25) == pytest.approx(0.5)
    assert antiderivative(model, "B", 0.25) == pytest.approx(0.1875)
    with pytest.raises(ValueError):
        antiderivative(model, "C", 0.5)
    with pytest.raises(ValueError):
        antiderivative(model, "A", 1.5)


def test_invalid_models_rejected():
    with pytest.raises(ValueError):
        from_callables("neg", lambda u: u - 0.5, lambda u: u)
    with pytest.raises(ValueError):
        from_callables("shifted", lambda u: np.ones_like(u), lambda u: u, B=lambda u: u + 1.0)
    with pytest.raises(ValueError):
        porous_medium(1.0)
    with pytest.raises(ValueError):
        logistic_demo(-1.0)
    with pytest.raises(ValueError):
        make_builtin("heat_equation")
    with pytest.raises(ValueError):
        make_builtin("burgers", nu=1.0)


def test_builtin_from_spec_polynomial():
    model = builtin_from_spec("polynomial", {"a": [1.0], "b": [1.0, -2.0]})
    assert model.B(1.0) == pytest.approx(0.0)
    assert check_conditions(model).e1.holds
    with pytest.raises(ValueError):
        builtin_from_spec("polynomial", {"a": [1.0]})


def test_check_conditions_is_cached_per_model():
    model = logistic_demo(1.0)
    assert check_conditions(model) is check_conditions(model)


def test_e2_integral_logistic_is_ln2():
    res = e2_integral(logistic_demo(1.0))
    assert res.finite
    assert res.value == pytest.approx(math.log(2.0), abs=1e-8)


def test_report_rows_cover_all_conditions():
    keys = [row[0] for row in check_conditions(logistic_demo(1.0)).rows()]
    assert keys == ["d1", "d2", "d3", "e1", "e2", "r1", "r2"]
