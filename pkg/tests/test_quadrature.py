"""Тести квадратур з класифікацією збіжності біля кінців."""

from __future__ import annotations

import math

import numpy as np
import pytest

from quasilinear.quadrature import CONVERGED, DIVERGENT, UNDETERMINED, endpoint_integral, integrate


def test_integrate_smooth_and_empty_interval():
    assert integrate(lambda u: u * u, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert integrate(np.exp, 0.3, 0.3) == 0.0


def test_integrable_singularity_converges():
    res = endpoint_integral(lambda u: u**-0.5, 0.0, 1.0)
    assert res.status == CONVERGED
    assert res.finite
    assert res.value == pytest.approx(2.0, abs=1e-8)


def test_log_singularity_at_both_ends():
    res = endpoint_integral(lambda u: math.log(u) + math.log(1.0 - u), 0.0, 1.0)
    assert res.status == CONVERGED
    assert res.value == pytest.approx(-2.0, abs=1e-8)


def test_nonintegrable_endpoint_is_divergent():
    res = endpoint_integral(lambda u: 1.0 / u, 0.0, 1.0, refine=("lo",))
    assert res.status == DIVERGENT
    assert not res.finite


def test_too_few_halvings_is_undetermined():
    # 1/u дає сталі внески панелей; для вердикту «divergent» треба п'ять панелей.
    res = endpoint_integral(lambda u: 1.0 / u, 0.0, 1.0, refine=("lo",), max_halvings=3)
    assert res.status == UNDETERMINED
    assert res.halvings == 3


def test_refine_only_requested_end():
    # Біля 1 функція гладка, уточнюємо лише лівий кінець.
    res = endpoint_integral(lambda u: u**-0.5, 0.0, 1.0, refine=("lo",))
    assert res.status == CONVERGED
    assert res.value == pytest.approx(2.0, abs=1e-8)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        endpoint_integral(lambda u: u, 1.0, 0.0)
    with pytest.raises(ValueError):
        endpoint_integral(lambda u: u, 0.0, 1.0, refine=("middle",))
