"""Коефіцієнтні моделі рівняння ∂ₜF = ½∂ₓ²A(F) − ∂ₓB(F).

Модель — це a, b на [0,1], їхні первісні A, B (A(0)=B(0)=0) та σ=√a.
Тут же перевірка структурних умов (D1–D3, E1–E2) у вигляді трьох станів
``holds`` / ``fails`` / ``undetermined``: звіт не кидає винятків.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicHermiteSpline

from setup_logger import setup_logger

from .quadrature import CONVERGED, DIVERGENT, IntegralResult, endpoint_integral, integrate, quad_checked

logger = setup_logger(__name__)

Coefficient = Callable[[Any], Any]
Smoothness = Literal["none", "C1_a", "C2a_C1b_Holder"]
TriState = Literal["holds", "fails", "undetermined"]

ANTIDERIVATIVE_TOL = 1e-10
# Вузли, на яких перевіряються інваріанти моделі при побудові.
_SAMPLE_GRID = np.linspace(0.0, 1.0, 257)
_INVARIANT_SLACK = 1e-12
# Таблиця для первісних, яких немає в замкненій формі.
_ANTIDERIVATIVE_NODES = 2049
B_AT_ONE_TOL = 1e-9

SMOOTHNESS_LEVELS: tuple[Smoothness, ...] = ("none", "C1_a", "C2a_C1b_Holder")


def _as_coefficient(fn: Coefficient) -> Coefficient:
    """Векторизує коефіцієнт: скаляр → float, масив → масив тієї ж форми."""

    def wrapped(u):
        u_arr = np.asarray(u, dtype=float)
        try:
            out = np.asarray(fn(u_arr), dtype=float)
        except (TypeError, ValueError):
            out = np.vectorize(fn, otypes=[float])(u_arr)
        if out.shape != u_arr.shape:
            out = np.broadcast_to(out, u_arr.shape).copy()
        return float(out) if out.ndim == 0 else out

    wrapped.__wrapped__ = fn
    return wrapped


def _tabulated_antiderivative(f: Coefficient) -> Coefficient:
    """Первісна ∫₀ᵘ f через кумулятивний quad на вузлах + ермітів сплайн."""
    nodes = np.linspace(0.0, 1.0, _ANTIDERIVATIVE_NODES)
    pieces = [integrate(f, float(lo), float(hi), ANTIDERIVATIVE_TOL) for lo, hi in zip(nodes[:-1], nodes[1:])]
    values = np.concatenate(([0.0], np.cumsum(pieces)))
    spline = CubicHermiteSpline(nodes, values, np.asarray(f(nodes), dtype=float))

    def F(u):
        out = spline(np.asarray(u, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    return F


@dataclass(frozen=True, eq=False)
class CoefficientModel:
    """Незмінна модель; хешується за ідентичністю (кеші Ψ прив'язані до об'єкта)."""

    name: str
    a: Coefficient
    b: Coefficient
    A: Coefficient
    B: Coefficient
    smoothness_declared: Smoothness = "none"
    params: dict[str, Any] = field(default_factory=dict)
    analytic_A: bool = True
    analytic_B: bool = True

    def __post_init__(self) -> None:
        if self.smoothness_declared not in SMOOTHNESS_LEVELS:
            raise ValueError(f"невідомий рівень гладкості: {self.smoothness_declared!r}")

        a_vals = np.asarray(self.a(_SAMPLE_GRID), dtype=float)
        if not np.all(np.isfinite(a_vals)):
            raise ValueError(f"модель {self.name}: a(u) не скінченна на [0,1]")
        if np.min(a_vals) < -_INVARIANT_SLACK:
            u_bad = float(_SAMPLE_GRID[int(np.argmin(a_vals))])
            raise ValueError(f"модель {self.name}: a({u_bad:.4g}) = {np.min(a_vals):.3g} < 0")
        if not np.all(np.isfinite(np.asarray(self.b(_SAMPLE_GRID), dtype=float))):
            raise ValueError(f"модель {self.name}: b(u) не скінченна на [0,1]")

        A_vals = np.asarray(self.A(_SAMPLE_GRID), dtype=float)
        if abs(A_vals[0]) > _INVARIANT_SLACK or abs(float(self.B(0.0))) > _INVARIANT_SLACK:
            raise ValueError(f"модель {self.name}: потрібні A(0) = 0 та B(0) = 0")
        if np.min(np.diff(A_vals)) < -1e-10:
            raise ValueError(f"модель {self.name}: A спадає, а має бути неспадною")

    def sigma(self, u):
        out = np.sqrt(np.maximum(np.asarray(self.a(u), dtype=float), 0.0))
        return float(out) if out.ndim == 0 else out

    def a_max(self, nodes: int = 1025) -> float:
        return float(np.max(self.a(np.linspace(0.0, 1.0, nodes))))

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "params": dict(self.params), "smoothness": self.smoothness_declared}


def from_callables(
    name: str,
    a: Coefficient,
    b: Coefficient,
    A: Coefficient | None = None,
    B: Coefficient | None = None,
    smoothness: Smoothness = "none",
    params: dict[str, Any] | None = None,
) -> CoefficientModel:
    """Загальний конструктор. Відсутні первісні рахуються квадратурою."""
    a_fn, b_fn = _as_coefficient(a), _as_coefficient(b)
    if A is None:
        logger.debug(f"{name}: A(u) без замкненої форми, табулюю квадратурою")
    if B is None:
        logger.debug(f"{name}: B(u) без замкненої форми, табулюю квадратурою")
    return CoefficientModel(
        name=name,
        a=a_fn,
        b=b_fn,
        A=_as_coefficient(A) if A is not None else _tabulated_antiderivative(a_fn),
        B=_as_coefficient(B) if B is not None else _tabulated_antiderivative(b_fn),
        smoothness_declared=smoothness,
        params=dict(params or {}),
        analytic_A=A is not None,
        analytic_B=B is not None,
    )


def _check_finite(kind: str, **params: float) -> None:
    for key, value in params.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValueError(f"{kind}: параметр {key}={value!r} має бути скінченним числом")


def _polynomial_pair(coeffs: Sequence[float]) -> tuple[Polynomial, Polynomial]:
    p = Polynomial(np.asarray(coeffs, dtype=float))
    return p, p.integ(lbnd=0.0)


def from_polynomials(
    a_coeffs: Sequence[float],
    b_coeffs: Sequence[float],
    name: str = "polynomial",
    smoothness: Smoothness = "C2a_C1b_Holder",
) -> CoefficientModel:
    """a, b у степеневому базисі (коефіцієнти від молодшого), первісні аналітично."""
    if len(a_coeffs) == 0 or len(b_coeffs) == 0:
        raise ValueError("порожній список коефіцієнтів полінома")
    for c in (*a_coeffs, *b_coeffs):
        _check_finite("polynomial", coeff=c)
    a_poly, A_poly = _polynomial_pair(a_coeffs)
    b_poly, B_poly = _polynomial_pair(b_coeffs)
    return from_callables(
        name,
        a_poly,
        b_poly,
        A=A_poly,
        B=B_poly,
        smoothness=smoothness,
        params={"a": list(map(float, a_coeffs)), "b": list(map(float, b_coeffs))},
    )


def porous_medium(q: float) -> CoefficientModel:
    _check_finite("porous_medium", q=q)
    if q <= 1:
        raise ValueError(f"porous_medium: потрібне q > 1, отримано q={q}")
    # a = q·u^{q−1} двічі гладка лише для q = 2 або q ≥ 3.
    smooth: Smoothness = "C2a_C1b_Holder" if (q == 2 or q >= 3) else "C1_a"
    return from_callables(
        f"porous_medium(q={q:g})",
        lambda u: q * np.power(u, q - 1.0),
        lambda u: np.zeros_like(u),
        A=lambda u: np.power(u, q),
        B=lambda u: np.zeros_like(u),
        smoothness=smooth,
        params={"q": q},
    )


def viscous_conservation(sigma2: float, b_fn: Coefficient | Sequence[float] = (0.0,)) -> CoefficientModel:
    """a ≡ σ²; b — callable або коефіцієнти полінома."""
    _check_finite("viscous_conservation", sigma2=sigma2)
    if sigma2 < 0:
        raise ValueError(f"viscous_conservation: sigma2={sigma2} < 0")
    name = f"viscous_conservation(sigma2={sigma2:g})"
    a = lambda u: np.full_like(u, sigma2)  # noqa: E731
    A = lambda u: sigma2 * u  # noqa: E731
    if callable(b_fn):
        return from_callables(name, a, b_fn, A=A, smoothness="C1_a", params={"sigma2": sigma2})
    b_poly, B_poly = _polynomial_pair(b_fn)
    return from_callables(
        name,
        a,
        b_poly,
        A=A,
        B=B_poly,
        smoothness="C2a_C1b_Holder",
        params={"sigma2": sigma2, "b": list(map(float, b_fn))},
    )


def burgers(sigma2: float) -> CoefficientModel:
    _check_finite("burgers", sigma2=sigma2)
    if sigma2 < 0:
        raise ValueError(f"burgers: sigma2={sigma2} < 0")
    return from_callables(
        f"burgers(sigma2={sigma2:g})",
        lambda u: np.full_like(u, sigma2),
        lambda u: 2.0 * u,
        A=lambda u: sigma2 * u,
        B=lambda u: u * u,
        smoothness="C2a_C1b_Holder",
        params={"sigma2": sigma2},
    )


def logistic_demo(sigma2: float = 1.0) -> CoefficientModel:
    """a ≡ σ², B(u) = u(1−u): Ψ(u) = (σ²/2)·ln(u/(1−u)) аналітично."""
    _check_finite("logistic_demo", sigma2=sigma2)
    if sigma2 < 0:
        raise ValueError(f"logistic_demo: sigma2={sigma2} < 0")
    return from_callables(
        f"logistic_demo(sigma2={sigma2:g})",
        lambda u: np.full_like(u, sigma2),
        lambda u: 1.0 - 2.0 * u,
        A=lambda u: sigma2 * u,
        B=lambda u: u * (1.0 - u),
        smoothness="C2a_C1b_Holder",
        params={"sigma2": sigma2},
    )


def _degenerate_G(w):
    aw = np.abs(w)
    return np.sign(w) * (aw**2.5 / 10.0 - 2.0 * aw**4.5 / 9.0)


def degenerate_demo() -> CoefficientModel:
    # a = u(1−u)|u−½|^{3/2}, B = u(1−u)(u−½)²: B(½)=0, тому E1 не виконується.
    return from_callables(
        "degenerate_demo",
        lambda u: u * (1.0 - u) * np.abs(u - 0.5) ** 1.5,
        lambda u: (u - 0.5) * (-4.0 * u * u + 4.0 * u - 0.5),
        A=lambda u: _degenerate_G(u - 0.5) - _degenerate_G(-0.5),
        B=lambda u: u * (1.0 - u) * (u - 0.5) ** 2,
        smoothness="C1_a",
    )


BUILTINS: dict[str, Callable[..., CoefficientModel]] = {
    "porous_medium": porous_medium,
    "viscous_conservation": viscous_conservation,
    "burgers": burgers,
    "logistic_demo": logistic_demo,
    "degenerate_demo": degenerate_demo,
}


def make_builtin(kind: str, **params: Any) -> CoefficientModel:
    factory = BUILTINS.get(kind)
    if factory is None:
        raise ValueError(f"невідома модель {kind!r}; доступні: {', '.join(sorted(BUILTINS))}")
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"{kind}: некоректні параметри {params}: {exc}") from exc


def builtin_from_spec(name: str, params: dict[str, Any] | None = None) -> CoefficientModel:
    """Модель із JSON-конфігу: вбудовані типи плюс ``polynomial`` (a, b — коефіцієнти)."""
    params = dict(params or {})
    if name == "polynomial":
        try:
            return from_polynomials(params["a"], params["b"], name=params.get("label", "polynomial"))
        except KeyError as exc:
            raise ValueError(f"polynomial: відсутній ключ {exc}") from exc
    return make_builtin(name, **params)


def antiderivative(model: CoefficientModel, which: Literal["A", "B"], u: float) -> float:
    """A(u) чи B(u); без замкненої форми — прямий адаптивний quad з tol 1e−10."""
    if which not in ("A", "B"):
        raise ValueError(f"which має бути 'A' або 'B', отримано {which!r}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u={u} поза [0, 1]")
    analytic = model.analytic_A if which == "A" else model.analytic_B
    if analytic:
        return float(getattr(model, which)(u))
    integrand = model.a if which == "A" else model.b
    return integrate(integrand, 0.0, float(u), ANTIDERIVATIVE_TOL)


# ---------------------------------------------------------------------------
# Умови
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionCheck:
    status: TriState
    witness: dict[str, float] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == "holds"


@dataclass(frozen=True)
class ConditionReport:
    model_name: str
    d1: ConditionCheck
    d2: ConditionCheck
    d3: ConditionCheck
    r1: bool
    r2: bool
    e1: ConditionCheck
    e2: ConditionCheck

    def rows(self) -> list[tuple[str, str, str]]:
        """(умова, статус, свідки) для CSV-звіту."""
        out = []
        for key in ("d1", "d2", "d3", "e1", "e2"):
            check: ConditionCheck = getattr(self, key)
            witness = ";".join(f"{k}={format(v, '.17g')}" for k, v in check.witness.items())
            out.append((key, check.status, witness))
        out.append(("r1", "holds" if self.r1 else "fails", "declared"))
        out.append(("r2", "holds" if self.r2 else "fails", "declared"))
        return out


def e2_ratio(model: CoefficientModel) -> Coefficient:
    """a/(2|B|): 0, де a = B = 0; +∞, де B = 0 < a."""

    def ratio(u):
        a = np.asarray(model.a(u), dtype=float)
        B = np.abs(np.asarray(model.B(u), dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(B > 0, a / (2.0 * np.where(B > 0, B, 1.0)), np.where(a > 0, np.inf, 0.0))
        return float(r) if r.ndim == 0 else r

    return ratio


def e2_integral(model: CoefficientModel, tol: float = 1e-10) -> IntegralResult:
    """∫₀^½ a·u/(2|B|) + ∫_½^1 a·(1−u)/(2|B|) з уточненням до всіх чотирьох кінців."""
    ratio = e2_ratio(model)
    left = endpoint_integral(lambda u: ratio(u) * u, 0.0, 0.5, tol)
    right = endpoint_integral(lambda u: ratio(u) * (1.0 - u), 0.5, 1.0, tol)
    statuses = {left.status, right.status}
    if DIVERGENT in statuses:
        status = DIVERGENT
    elif statuses == {CONVERGED}:
        status = CONVERGED
    else:
        status = "undetermined"
    return IntegralResult(left.value + right.value, status, max(left.halvings, right.halvings))


def _check_e1(model: CoefficientModel, grid: np.ndarray, tol: float) -> ConditionCheck:
    interior = grid[1:-1]
    B_int = np.asarray(model.B(interior), dtype=float)
    B_one = float(model.B(1.0))
    witness = {"B_at_1": B_one, "B_min": float(np.min(B_int))}
    if np.min(B_int) <= 0 or abs(B_one) > B_AT_ONE_TOL:
        return ConditionCheck("fails", witness)

    delta = float(grid[1])
    value, _, ok = quad_checked(e2_ratio(model), delta, 1.0 - delta, tol, limit=500)
    witness["local_integral"] = value
    if not ok:
        return ConditionCheck("undetermined", witness)
    return ConditionCheck("holds", witness)


@functools.lru_cache(maxsize=64)
def check_conditions(model: CoefficientModel, grid_size: int = 512, tol: float = 1e-10) -> ConditionReport:
    if grid_size < 16:
        raise ValueError(f"grid_size={grid_size}: потрібно щонайменше 16 вузлів")
    grid = np.linspace(0.0, 1.0, grid_size + 1)
    a_vals = np.asarray(model.a(grid), dtype=float)
    A_vals = np.asarray(model.A(grid), dtype=float)

    a_lower = float(np.min(a_vals))
    d3 = ConditionCheck("holds" if a_lower > tol else "fails", {"a_lower": a_lower})
    a_pos_min = float(np.min(a_vals[1:]))
    d2 = ConditionCheck("holds" if a_pos_min > 0 else "fails", {"a_min_on_(0,1]": a_pos_min})
    min_increment = float(np.min(np.diff(A_vals)))
    d1 = ConditionCheck("holds" if min_increment > 0 else "fails", {"A_min_increment": min_increment})
    # D3 ⇒ D2 ⇒ D1: сітка могла «не помітити» зростання A на дрібних кроках.
    if d3.holds and not d2.holds:
        d2 = ConditionCheck("holds", d2.witness)
    if d2.holds and not d1.holds:
        d1 = ConditionCheck("holds", d1.witness)

    e1 = _check_e1(model, grid, tol)
    e2_res = e2_integral(model, tol)
    e2_status: TriState = {CONVERGED: "holds", DIVERGENT: "fails"}.get(e2_res.status, "undetermined")
    e2 = ConditionCheck(e2_status, {"integral": e2_res.value, "halvings": float(e2_res.halvings)})

    level = SMOOTHNESS_LEVELS.index(model.smoothness_declared)
    report = ConditionReport(
        model_name=model.name,
        d1=d1,
        d2=d2,
        d3=d3,
        r1=level >= 1,
        r2=level >= 2,
        e1=e1,
        e2=e2,
    )
    for key in ("e1", "e2"):
        if getattr(report, key).status == "undetermined":
            logger.warning(f"{model.name}: умову {key.upper()} не вдалося встановити чисельно")
    logger.debug(
        f"{model.name}: D1={d1.status} D2={d2.status} D3={d3.status} E1={e1.status} E2={e2.status}"
    )
    return report
