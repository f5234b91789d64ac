"""Стаціонарні розв'язки F_∞(x) = Ψ⁻¹(x + x̄), де Ψ(u) = ∫_½^u a/(2B).

Ψ табулюється один раз на модель (кеш за ідентичністю моделі) на
чебишевській сітці з 2048 панелей; між вузлами значення добирається
квадратурою Гаусса–Лежандра на частині панелі.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from scipy import optimize

from setup_logger import setup_logger

from .measure import QuantileProfile, StepCDF, chebyshev_grid, quantile, write_csv
from .model import CoefficientModel, check_conditions, e2_integral, e2_ratio
from .quadrature import CONVERGED, DIVERGENT, endpoint_integral, integrate, quad_checked

logger = setup_logger(__name__)

PSI_TABLE_PANELS = 2048
PSI_TOL = 1e-10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)

HardyStatus = Literal["satisfied", "violated", "undetermined"]
HARDY_DEPTHS = (20, 30, 40)


def _require_e1(model: CoefficientModel) -> None:
    report = check_conditions(model)
    if not report.e1.holds:
        raise ValueError(f"немає стаціонарної родини для {model.name}: E1 {report.e1.status} ({report.e1.witness})")


@dataclass(frozen=True, eq=False)
class StationaryProfile:
    model: CoefficientModel
    grid: np.ndarray
    psi_table: np.ndarray
    lower_limit: float | None
    upper_limit: float | None
    first_abs_moment: float

    @property
    def finite_limits(self) -> tuple[bool, bool]:
        return self.lower_limit is not None, self.upper_limit is not None

    def psi(self, u):
        u_arr = np.asarray(u, dtype=float)
        flat = u_arr.ravel()
        out = np.empty_like(flat)
        g, table = self.grid, self.psi_table
        inside = (flat >= g[0]) & (flat <= g[-1])

        if np.any(inside):
            ui = flat[inside]
            j = np.clip(np.searchsorted(g, ui), 1, g.size - 1)
            # найближчий вузол таблиці
            j = np.where(np.abs(g[j - 1] - ui) <= np.abs(g[j] - ui), j - 1, j)
            base = g[j]
            half = 0.5 * (ui - base)
            mid = 0.5 * (ui + base)
            pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            vals = np.asarray(e2_ratio(self.model)(pts), dtype=float)
            out[inside] = table[j] + half * (vals @ _GL_WEIGHTS)

        ratio = e2_ratio(self.model)
        for idx in np.flatnonzero(~inside):
            v = float(flat[idx])
            if v < g[0]:
                out[idx] = table[0] - integrate(ratio, v, float(g[0]), PSI_TOL)
            else:
                out[idx] = table[-1] + integrate(ratio, float(g[-1]), v, PSI_TOL)
        out = out.reshape(u_arr.shape)
        return float(out) if out.ndim == 0 else out

    def inverse(self, x: float, tol: float = 1e-12) -> float:
        x = float(x)
        if math.isnan(x):
            raise ValueError("Ψ⁻¹(NaN)")
        if self.upper_limit is not None and x >= self.upper_limit:
            return 1.0
        if self.lower_limit is not None and x <= self.lower_limit:
            return 0.0
        g, table = self.grid, self.psi_table
        j = int(np.searchsorted(table, x))
        if 0 < j < g.size:
            lo, hi = float(g[j - 1]), float(g[j])
        elif j == 0:
            hi = float(g[0])
            lo = hi / 2
            while self.psi(lo) > x:
                hi, lo = lo, lo / 2
                if lo < 1e-300:
                    return 0.0
        else:
            lo = float(g[-1])
            hi = 1.0 - (1.0 - lo) / 2
            while self.psi(hi) < x:
                lo, hi = hi, 1.0 - (1.0 - hi) / 2
                if hi >= 1.0:
                    return 1.0
        u = optimize.brentq(lambda v: self.psi(v) - x, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        residual = abs(self.psi(u) - x)
        if residual > tol:
            logger.debug(f"Ψ⁻¹({x:.6g}): залишок {residual:.3g} > {tol:g}")
        return float(u)

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("u", "psi"), zip(self.grid, self.psi_table))


@functools.lru_cache(maxsize=32)
def stationary_profile(model: CoefficientModel) -> StationaryProfile:
    _require_e1(model)
    ratio = e2_ratio(model)
    grid = chebyshev_grid(PSI_TABLE_PANELS)
    center = int(np.flatnonzero(grid == 0.5)[0])
    pieces = np.array([quad_checked(ratio, float(a), float(b), PSI_TOL)[0] for a, b in zip(grid[:-1], grid[1:])])
    table = np.zeros(grid.size)
    table[center + 1 :] = np.cumsum(pieces[center:])
    table[:center] = -np.cumsum(pieces[:center][::-1])[::-1]
    if not np.all(np.isfinite(table)):
        raise RuntimeError(f"{model.name}: Ψ не скінченна всередині (0,1)")

    lower = endpoint_integral(ratio, 0.0, float(grid[0]), PSI_TOL, refine=("lo",))
    upper = endpoint_integral(ratio, float(grid[-1]), 1.0, PSI_TOL, refine=("hi",))
    lower_limit = float(table[0] - lower.value) if lower.status == CONVERGED else None
    upper_limit = float(table[-1] + upper.value) if upper.status == CONVERGED else None
    for side, res in (("0", lower), ("1", upper)):
        if res.status not in (CONVERGED, DIVERGENT):
            logger.warning(f"{model.name}: не вдалося встановити скінченність Ψ біля {side}, вважаю нескінченною")

    moment = e2_integral(model)
    first_abs_moment = moment.value if moment.status == CONVERGED else math.inf
    logger.debug(f"{model.name}: таблиця Ψ на {grid.size} вузлах, Ψ(0+)={lower_limit}, Ψ(1−)={upper_limit}")
    return StationaryProfile(model, grid, table, lower_limit, upper_limit, first_abs_moment)


def psi(model: CoefficientModel, u):
    u_arr = np.asarray(u, dtype=float)
    if np.any(~((u_arr > 0) & (u_arr < 1))):
        raise ValueError(f"u має лежати в (0, 1), отримано {u_arr.ravel()[:5]}")
    out = np.asarray(stationary_profile(model).psi(u_arr), dtype=float)
    out = np.where(np.isnan(out), np.where(u_arr < 0.5, -np.inf, np.inf), out)
    return float(out) if out.ndim == 0 else out


def psi_inverse(model: CoefficientModel, x, tol: float = 1e-12):
    prof = stationary_profile(model)
    x_arr = np.asarray(x, dtype=float)
    out = np.array([prof.inverse(v, tol) for v in x_arr.ravel()]).reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class StationaryCDF:
    """x ↦ Ψ⁻¹(x + x̄) разом із щільністю та квантильним профілем."""

    profile: StationaryProfile
    xbar: float = 0.0

    @property
    def model(self) -> CoefficientModel:
        return self.profile.model

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.array([self.profile.inverse(v) for v in (x_arr + self.xbar).ravel()]).reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        """p_∞(x) = 2B(u)/a(u) при u = F_∞(x); нуль поза носієм."""
        u = np.asarray(self(x), dtype=float)
        a = np.asarray(self.model.a(u), dtype=float)
        B = np.asarray(self.model.B(u), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where((u > 0) & (u < 1) & (a > 0), 2.0 * B / np.where(a > 0, a, 1.0), 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile_profile(self, exact: bool = True) -> QuantileProfile:
        """F_∞⁻¹(u) = Ψ(u) − x̄; ``exact=False`` — лише інтерполяція таблиці (швидше)."""
        prof, xbar = self.profile, self.xbar
        lower = "clamped" if prof.lower_limit is not None else "divergent"
        upper = "clamped" if prof.upper_limit is not None else "divergent"
        fn = (lambda u: prof.psi(u) - xbar) if exact else None
        return QuantileProfile(prof.grid, prof.psi_table - xbar, lower, upper, fn=fn)

    def mean(self) -> float:
        res = endpoint_integral(lambda u: float(self.profile.psi(u)), 0.0, 1.0, PSI_TOL)
        if res.status != CONVERGED:
            raise ValueError(f"{self.model.name}: середнє стаціонарного розподілу не визначене ({res.status})")
        return res.value - self.xbar

    def to_csv(self, path: str | Path, x_grid: Sequence[float]) -> Path:
        x = np.asarray(x_grid, dtype=float)
        return write_csv(path, ("x", "F"), zip(x, np.atleast_1d(self(x))))


def stationary_cdf(model: CoefficientModel, xbar: float = 0.0) -> StationaryCDF:
    return StationaryCDF(stationary_profile(model), float(xbar))


def stationary_first_moment(model: CoefficientModel) -> float:
    """∫|x| dF_∞ для x̄ = 0, або ``math.inf``, якщо E2 не виконується."""
    _require_e1(model)
    res = e2_integral(model)
    if res.status == CONVERGED:
        return res.value
    if res.status != DIVERGENT:
        logger.warning(f"{model.name}: інтеграл E2 не збігся чисельно, вважаю момент нескінченним")
    return math.inf


def centering_offset(model: CoefficientModel, F0inv: QuantileProfile | StepCDF) -> float:
    """x̄ = ∫₀¹ (Ψ(u) − F₀⁻¹(u)) du: F_∞ з цим x̄ має те саме середнє, що й F₀."""
    prof = stationary_profile(model)

    def integrand(u: float) -> float:
        return float(prof.psi(u)) - float(quantile(F0inv, u))

    res = endpoint_integral(integrand, 0.0, 1.0, PSI_TOL)
    if res.status != CONVERGED:
        raise ValueError(f"{model.name}: ∫(Ψ − F₀⁻¹) {res.status}, потрібні E2 та скінченне середнє F₀")
    return res.value


# ---------------------------------------------------------------------------
# Харді / Пуанкаре
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HardySide:
    status: HardyStatus
    partial_sups: tuple[float, ...]


@dataclass(frozen=True)
class HardyReport:
    left: HardySide
    right: HardySide

    @property
    def status(self) -> HardyStatus:
        statuses = {self.left.status, self.right.status}
        if "violated" in statuses:
            return "violated"
        if statuses == {"satisfied"}:
            return "satisfied"
        return "undetermined"


def _hardy_side(ratio: Callable, side: Literal["left", "right"], depths: Sequence[int]) -> HardySide:
    square = lambda v: ratio(v) ** 2  # noqa: E731
    K = max(depths)
    dist = 0.5 ** np.arange(1, K + 2)  # відстань до кінця: ½, ¼, ...
    nodes = 1.0 - dist if side == "right" else dist
    cumulative = 0.0
    s = np.empty(K + 1)
    s[0] = 0.0
    for k in range(1, K + 1):
        lo, hi = sorted((float(nodes[k - 1]), float(nodes[k])))
        cumulative += quad_checked(square, lo, hi, PSI_TOL)[0]
        s[k] = dist[k] * cumulative
    sups = tuple(float(np.max(s[: d + 1])) for d in depths)
    if not all(math.isfinite(v) for v in sups):
        return HardySide("violated", sups)
    s1, s2, s3 = sups[0], sups[len(sups) // 2], sups[-1]
    if s3 <= s1 * (1 + 1e-3) + 1e-12:
        return HardySide("satisfied", sups)
    if s3 >= 2 * s2 and s2 >= 2 * s1:
        return HardySide("violated", sups)
    return HardySide("undetermined", sups)


def hardy_poincare_check(model: CoefficientModel, depths: Sequence[int] = HARDY_DEPTHS) -> HardyReport:
    """sup (1−u)∫_½^u (a/2B)² і sup u∫_u^½ (a/2B)² на геометричних сітках трьох глибин."""
    _require_e1(model)
    depths = tuple(sorted(int(d) for d in depths))
    if len(depths) < 3 or depths[0] < 1:
        raise ValueError(f"потрібні три глибини сітки ≥ 1, отримано {depths}")
    ratio = e2_ratio(model)
    report = HardyReport(_hardy_side(ratio, "left", depths), _hardy_side(ratio, "right", depths))
    if report.status == "undetermined":
        logger.warning(f"{model.name}: критерій Харді не встановлено чисельно")
    return report


# ---------------------------------------------------------------------------
# Вироджений приклад і слабкий залишок
# ---------------------------------------------------------------------------

_HALF_WIDTH = 1.0 / math.sqrt(2.0)


def degenerate_family(h: float, x):
    """F_{∞,h} для degenerate_demo: плато ½ на [0, h), параболічні крила."""
    if not h >= 0:
        raise ValueError(f"h={h}: потрібне h ≥ 0")
    x_arr = np.asarray(x, dtype=float)
    out = np.select(
        [
            x_arr < -_HALF_WIDTH,
            x_arr < 0.0,
            x_arr < h,
            x_arr < h + _HALF_WIDTH,
        ],
        [
            0.0,
            0.5 - x_arr**2,
            0.5,
            0.5 + (x_arr - h) ** 2,
        ],
        default=1.0,
    )
    return float(out) if out.ndim == 0 else out


def degenerate_breakpoints(h: float) -> tuple[float, ...]:
    return (-_HALF_WIDTH, 0.0, float(h), float(h) + _HALF_WIDTH)


@dataclass(frozen=True)
class BumpFunction:
    """φ(x) = exp(−1/(1−t²)), t = (x − center)/radius, носій [center ± radius]."""

    center: float
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"радіус {self.radius} має бути додатним")

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.radius, self.center + self.radius

    def _parts(self, x):
        t = (np.asarray(x, dtype=float) - self.center) / self.radius
        s = 1.0 - t * t
        inside = s > 1e-8
        s_safe = np.where(inside, s, 1.0)
        phi = np.where(inside, np.exp(-1.0 / s_safe), 0.0)
        return t, s_safe, inside, phi

    def __call__(self, x):
        return self._parts(x)[3]

    def d1(self, x):
        t, s, inside, phi = self._parts(x)
        return np.where(inside, phi * (-2.0 * t / s**2) / self.radius, 0.0)

    def d2(self, x):
        t, s, inside, phi = self._parts(x)
        g1 = -2.0 * t / s**2
        g2 = -2.0 / s**2 - 8.0 * t * t / s**3
        return np.where(inside, phi * (g1 * g1 + g2) / self.radius**2, 0.0)


def bump_family(lo: float, hi: float, count: int = 20, radius: float | None = None) -> list[BumpFunction]:
    if count < 1 or not hi > lo:
        raise ValueError(f"bump_family: некоректні межі [{lo}, {hi}] або count={count}")
    centers = np.linspace(lo, hi, count)
    if radius is None:
        radius = 2.0 * (hi - lo) / max(count - 1, 1)
    return [BumpFunction(float(c), float(radius)) for c in centers]


def stationary_residual(
    model: CoefficientModel,
    F: Callable,
    testfns: Iterable[BumpFunction] | None = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """max_φ |∫ ½A(F)φ″ + B(F)φ′ dx| по сімейству пробних функцій."""
    testfns = list(testfns) if testfns is not None else bump_family(-3.0, 3.0, 20, 1.0)

    def integrand_for(phi: BumpFunction):
        def f(x: float) -> float:
            u = float(F(x))
            return 0.5 * float(model.A(u)) * float(phi.d2(x)) + float(model.B(u)) * float(phi.d1(x))

        return f

    worst = 0.0
    for phi in testfns:
        lo, hi = phi.support
        inner = sorted(b for b in breakpoints if lo < b < hi)
        value, _, ok = quad_checked_points(integrand_for(phi), lo, hi, inner)
        if not ok:
            logger.debug(f"залишок на φ(c={phi.center:.3g}): quad не досяг точності")
        worst = max(worst, abs(value))
    return worst


def quad_checked_points(f: Callable[[float], float], lo: float, hi: float, points: Sequence[float]):
    """Як ``quad_checked``, але з відомими точками зламу підінтегральної функції."""
    edges = [lo, *points, hi]
    total, err, ok = 0.0, 0.0, True
    for a, b in zip(edges[:-1], edges[1:]):
        v, e, good = quad_checked(f, a, b, 1e-12)
        total += v
        err += e
        ok = ok and good
    return total, err, ok


def export_profile(profile: StationaryProfile, out_dir: str | Path, xbar: float = 0.0, x_points: int = 401) -> list[Path]:
    """Таблиці (u, Ψ(u)) та (x, F_∞(x)) для звіту."""
    out_dir = Path(out_dir)
    cdf = StationaryCDF(profile, xbar)
    lo = profile.psi(1e-6) - xbar if profile.lower_limit is None else profile.lower_limit - xbar
    hi = profile.psi(1 - 1e-6) - xbar if profile.upper_limit is None else profile.upper_limit - xbar
    x = np.linspace(lo, hi, x_points)
    return [profile.to_csv(out_dir / "psi_table.csv"), cdf.to_csv(out_dir / "stationary_cdf.csv", x)]
