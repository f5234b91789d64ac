"""Адаптивні інтеграли з класифікацією збіжності біля кінців відрізка.

``integrate`` — тонка обгортка над QUADPACK (``scipy.integrate.quad``).
``endpoint_integral`` розбиває відрізок на ядро та геометричні панелі, що
стискаються до кінців, і повертає не лише значення, а й вердикт:
``converged`` / ``divergent`` / ``undetermined``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal

from scipy import integrate as sp_integrate

from setup_logger import setup_logger

logger = setup_logger(__name__)

Status = Literal["converged", "divergent", "undetermined"]

CONVERGED: Status = "converged"
DIVERGENT: Status = "divergent"
UNDETERMINED: Status = "undetermined"

DEFAULT_TOL = 1e-10
MAX_HALVINGS = 40
# Скільки поспіль панелей без спадання вважаємо ознакою розбіжності.
FLAT_PANELS = 5
FLAT_RATIO = 1.0 - 1e-6
# Поріг «геометричного» спадання, після якого залишок добираємо одним quad.
GEOMETRIC_RATIO = 0.95


@dataclass(frozen=True)
class IntegralResult:
    value: float
    status: Status
    halvings: int = 0

    @property
    def finite(self) -> bool:
        return self.status == CONVERGED


def quad_checked(f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_TOL, limit: int = 200):
    """Повертає (value, abserr, ok); ok=False, якщо QUADPACK поскаржився."""
    res = sp_integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=limit, full_output=1)
    value, abserr = float(res[0]), float(res[1])
    ok = len(res) == 3 and math.isfinite(value)
    return value, abserr, ok


def integrate(f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
    if lo == hi:
        return 0.0
    value, abserr, ok = quad_checked(f, lo, hi, tol)
    if not ok:
        logger.debug(f"quad [{lo:.6g}, {hi:.6g}]: точність не досягнута (оцінка похибки {abserr:.3g})")
    return value


def geometric_tail(
    panel: Callable[[float, float], float],
    edge: float,
    width: float,
    side: Literal["lo", "hi"],
    tol: float = DEFAULT_TOL,
    max_halvings: int = MAX_HALVINGS,
    finish: Callable[[float, float], tuple[float, float, bool]] | None = None,
) -> tuple[float, Status, int]:
    """Сума панелей, що половинно стискаються до ``edge``.

    Для ``side="lo"`` панелі — [edge + w/2, edge + w], для ``"hi"`` —
    [edge - w, edge - w/2]; w стартує з ``width``. ``panel(lo, hi)`` рахує
    інтеграл однієї панелі. Якщо задано ``finish``, то після трьох поспіль
    геометричних спадань залишок [edge, edge + w/2] добирається ним одним викликом.
    """
    total = 0.0
    prev: float | None = None
    ratios: list[float] = []
    w = width
    for k in range(1, max_halvings + 1):
        lo, hi = (edge + w / 2, edge + w) if side == "lo" else (edge - w, edge - w / 2)
        piece = panel(lo, hi)
        if not math.isfinite(piece):
            return total, DIVERGENT, k
        total += piece
        if abs(piece) <= tol * max(1.0, abs(total)):
            return total, CONVERGED, k

        if prev is not None and prev != 0.0:
            ratios.append(abs(piece / prev))
            if len(ratios) >= FLAT_PANELS - 1 and min(ratios[-(FLAT_PANELS - 1):]) >= FLAT_RATIO:
                return total, DIVERGENT, k
            if finish is not None and len(ratios) >= 3 and max(ratios[-3:]) < GEOMETRIC_RATIO:
                rest_lo, rest_hi = (edge, edge + w / 2) if side == "lo" else (edge - w / 2, edge)
                rest, err, ok = finish(rest_lo, rest_hi)
                if ok and err <= 10 * tol * max(1.0, abs(total + rest)):
                    return total + rest, CONVERGED, k
        prev = piece
        w /= 2
    return total, UNDETERMINED, max_halvings


def _combine(statuses: Iterable[Status]) -> Status:
    statuses = list(statuses)
    if DIVERGENT in statuses:
        return DIVERGENT
    if UNDETERMINED in statuses:
        return UNDETERMINED
    return CONVERGED


def endpoint_integral(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    refine: tuple[str, ...] = ("lo", "hi"),
    max_halvings: int = MAX_HALVINGS,
) -> IntegralResult:
    """∫_lo^hi f з уточненням біля кінців, перелічених у ``refine``.

    Ядро відрізка рахується одним quad; до кожного уточнюваного кінця йде
    послідовність панелей із половинним кроком. Якщо внесок панелі падає нижче
    tol·max(1, |сума|) — ``converged``; якщо FLAT_PANELS поспіль панелей не
    спадають — ``divergent``; вичерпано ``max_halvings`` — ``undetermined``.
    """
    if not hi > lo:
        raise ValueError(f"порожній відрізок інтегрування [{lo}, {hi}]")
    unknown = set(refine) - {"lo", "hi"}
    if unknown:
        raise ValueError(f"невідомі кінці для уточнення: {sorted(unknown)}")

    width = hi - lo
    core_lo = lo + width / 4 if "lo" in refine else lo
    core_hi = hi - width / 4 if "hi" in refine else hi

    core, _, ok = quad_checked(f, core_lo, core_hi, tol)
    if not math.isfinite(core):
        return IntegralResult(core, DIVERGENT, 0)
    statuses: list[Status] = [CONVERGED if ok else UNDETERMINED]

    def panel(a: float, b: float) -> float:
        return quad_checked(f, a, b, tol)[0]

    def finish(a: float, b: float):
        return quad_checked(f, a, b, tol)

    total = core
    halvings = 0
    for side, edge in (("lo", lo), ("hi", hi)):
        if side not in refine:
            continue
        value, status, k = geometric_tail(panel, edge, width / 4, side, tol, max_halvings, finish)
        total += value
        statuses.append(status)
        halvings = max(halvings, k)

    status = _combine(statuses)
    if status != CONVERGED:
        logger.debug(f"∫ на [{lo:.6g}, {hi:.6g}]: {status} після {halvings} поділів")
    return IntegralResult(total, status, halvings)
