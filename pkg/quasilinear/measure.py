"""Функції розподілу, псевдообернені та відстань Вассерштейна на прямій.

Усі оцінювачі W_p повертають W_p^p (p-ий степінь), корінь бере викликач.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from setup_logger import setup_logger

from .quadrature import CONVERGED, DIVERGENT, endpoint_integral, geometric_tail

logger = setup_logger(__name__)

EndpointTag = Literal["clamped", "divergent"]

MASS_TOL = 1e-12
DEFAULT_N_QUAD = 4096
DEFAULT_PROFILE_PANELS = 2048


def fmt(x: float) -> str:
    """Десяткове представлення без втрат, однакове між запусками."""
    return format(float(x), ".17g")


def chebyshev_grid(panels: int = DEFAULT_PROFILE_PANELS) -> np.ndarray:
    """u_k = (1 − cos(πk/panels))/2, k = 1..panels−1: згущення до 0 та 1, для парного panels містить ½."""
    k = np.arange(1, panels)
    grid = 0.5 * (1.0 - np.cos(np.pi * k / panels))
    if panels % 2 == 0:
        grid[panels // 2 - 1] = 0.5
    return grid


def _check_unit_open(u: np.ndarray) -> None:
    if np.any(~((u > 0.0) & (u < 1.0))):
        bad = u[~((u > 0.0) & (u < 1.0))]
        raise ValueError(f"u має лежати в (0, 1), отримано {bad.ravel()[:5]}")


# ---------------------------------------------------------------------------
# StepCDF
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepCDF:
    """Скінченна атомарна міра: строго зростаючі точки, додатні маси з сумою 1."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self) -> None:
        loc = np.array(self.locations, dtype=float).ravel()
        mass = np.array(self.masses, dtype=float).ravel()
        if loc.size == 0 or loc.shape != mass.shape:
            raise ValueError(f"StepCDF: {loc.size} точок і {mass.size} мас")
        if not np.all(np.isfinite(loc)):
            raise ValueError("StepCDF: нескінченні координати атомів")
        if np.any(mass <= 0):
            raise ValueError("StepCDF: маси атомів мають бути додатними")
        if abs(float(np.sum(mass)) - 1.0) > MASS_TOL * max(1, loc.size):
            raise ValueError(f"StepCDF: сума мас {np.sum(mass)!r} ≠ 1")
        if loc.size > 1 and np.any(np.diff(loc) <= 0):
            raise ValueError("StepCDF: координати атомів мають строго зростати")
        loc.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)

    @classmethod
    def from_atoms(cls, locations: Sequence[float], masses: Sequence[float]) -> StepCDF:
        """Сортує та зливає атоми з однаковими координатами."""
        loc = np.asarray(locations, dtype=float).ravel()
        mass = np.asarray(masses, dtype=float).ravel()
        if loc.shape != mass.shape:
            raise ValueError(f"StepCDF: {loc.size} точок і {mass.size} мас")
        uniq, inverse = np.unique(loc, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, mass)
        return cls(uniq, merged)

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> StepCDF:
        """Емпірична міра (1/n)Σδ_{xᵢ}."""
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("StepCDF: порожня вибірка")
        uniq, counts = np.unique(x, return_counts=True)
        return cls(uniq, counts / x.size)

    @classmethod
    def dirac(cls, at: float) -> StepCDF:
        return cls(np.array([float(at)]), np.array([1.0]))

    @property
    def cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.masses)
        cum[-1] = 1.0
        return cum

    def __call__(self, x):
        """F(x) = μ((−∞, x])."""
        x_arr = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.locations, x_arr, side="right")
        out = np.where(idx > 0, np.concatenate(([0.0], self.cumulative))[idx], 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        """F⁻¹(u) = inf{x : F(x) > u}."""
        u_arr = np.asarray(u, dtype=float)
        _check_unit_open(u_arr)
        idx = np.minimum(np.searchsorted(self.cumulative, u_arr, side="right"), self.locations.size - 1)
        out = self.locations[idx]
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return float(np.dot(self.locations, self.masses))

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("location", "mass"), zip(self.locations, self.masses))

    @classmethod
    def from_csv(cls, path: str | Path) -> StepCDF:
        rows = read_csv(path)
        return cls.from_atoms([float(r["location"]) for r in rows], [float(r["mass"]) for r in rows])


# ---------------------------------------------------------------------------
# QuantileProfile
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantileProfile:
    """Табуляція F⁻¹ на сітці з (0,1).

    Якщо задано ``fn``, саме вона є обчислювачем (точна квантильна функція),
    а таблиця лише описує профіль. Інакше — кусково-лінійна інтерполяція;
    за межами сітки ``clamped`` кінець продовжується сталою, ``divergent`` —
    лінійно з нахилом крайньої панелі.
    """

    grid: np.ndarray
    values: np.ndarray
    lower: EndpointTag = "clamped"
    upper: EndpointTag = "clamped"
    fn: Callable | None = None

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        if grid.size == 0 or grid.shape != values.shape:
            raise ValueError(f"QuantileProfile: сітка {grid.size} та значення {values.size}")
        _check_unit_open(grid)
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("QuantileProfile: сітка має строго зростати")
        if not np.all(np.isfinite(values)):
            raise ValueError("QuantileProfile: нескінченні значення на сітці")
        if values.size > 1 and np.any(np.diff(values) < 0):
            k = int(np.argmin(np.diff(values)))
            raise ValueError(f"QuantileProfile: значення спадають між u={grid[k]:.6g} та u={grid[k + 1]:.6g}")
        for tag in (self.lower, self.upper):
            if tag not in ("clamped", "divergent"):
                raise ValueError(f"QuantileProfile: невідома поведінка на кінці {tag!r}")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls,
        fn: Callable,
        grid: np.ndarray | None = None,
        lower: EndpointTag = "clamped",
        upper: EndpointTag = "clamped",
    ) -> QuantileProfile:
        grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(fn(grid), dtype=float), lower, upper, fn)

    @classmethod
    def constant(cls, value: float) -> QuantileProfile:
        return cls(np.array([0.5]), np.array([float(value)]))

    @classmethod
    def from_grid_cdf(
        cls, x_grid: np.ndarray, cdf_values: np.ndarray, grid: np.ndarray | None = None
    ) -> QuantileProfile:
        """Обертає неспадну табличну CDF (лінійна інтерполяція між вузлами x)."""
        x = np.asarray(x_grid, dtype=float)
        F = np.maximum.accumulate(np.clip(np.asarray(cdf_values, dtype=float), 0.0, 1.0))
        grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
        _check_unit_open(grid)
        j = np.clip(np.searchsorted(F, grid, side="right"), 1, x.size - 1)
        F_lo, F_hi = F[j - 1], F[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            theta = np.where(F_hi > F_lo, (grid - F_lo) / (F_hi - F_lo), 1.0)
        values = x[j - 1] + np.clip(theta, 0.0, 1.0) * (x[j] - x[j - 1])
        return cls(grid, np.maximum.accumulate(values))

    def __call__(self, u):
        u_arr = np.asarray(u, dtype=float)
        if self.fn is not None:
            out = np.asarray(self.fn(u_arr), dtype=float)
        else:
            out = self._interpolate(u_arr)
        return float(out) if out.ndim == 0 else out

    def _interpolate(self, u: np.ndarray) -> np.ndarray:
        g, v = self.grid, self.values
        out = np.interp(u, g, v)
        if g.size < 2:
            return out
        if self.lower == "divergent":
            slope = (v[1] - v[0]) / (g[1] - g[0])
            out = np.where(u < g[0], v[0] + slope * (u - g[0]), out)
        if self.upper == "divergent":
            slope = (v[-1] - v[-2]) / (g[-1] - g[-2])
            out = np.where(u > g[-1], v[-1] + slope * (u - g[-1]), out)
        return out

    def shifted(self, c: float) -> QuantileProfile:
        fn = None if self.fn is None else (lambda u, f=self.fn: f(u) + c)
        return QuantileProfile(self.grid, self.values + c, self.lower, self.upper, fn)

    def mean(self, tol: float = 1e-10) -> float:
        """∫₀¹ F⁻¹(u) du."""
        res = endpoint_integral(lambda u: float(self(u)), 0.0, 1.0, tol)
        if res.status == DIVERGENT:
            raise ValueError("середнє профілю не існує (інтеграл розбігається)")
        if res.status != CONVERGED:
            logger.warning(f"середнє профілю: квадратура не збіглася ({res.halvings} поділів)")
        return res.value

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("u", "value"), zip(self.grid, self.values))


def quantile(cdf: StepCDF | QuantileProfile, u):
    u_arr = np.asarray(u, dtype=float)
    _check_unit_open(u_arr)
    return cdf.quantile(u_arr) if isinstance(cdf, StepCDF) else cdf(u_arr)


def _lower_tag(obj) -> str:
    return getattr(obj, "lower", "clamped")


def _upper_tag(obj) -> str:
    return getattr(obj, "upper", "clamped")


# ---------------------------------------------------------------------------
# Вассерштейн
# ---------------------------------------------------------------------------


def _check_p(p: float, strict: bool = False) -> None:
    if strict and not p > 1:
        raise ValueError(f"p={p}: потрібне p > 1")
    if not p >= 1:
        raise ValueError(f"p={p}: потрібне p ≥ 1")


def _wpp_step_exact(F: StepCDF, G: StepCDF, p: float) -> float:
    levels = np.union1d(F.cumulative, G.cumulative)
    levels = levels[levels < 1.0]
    edges = np.concatenate(([0.0], levels, [1.0]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    return float(np.sum(widths * np.abs(F.quantile(mids) - G.quantile(mids)) ** p))


def wasserstein_pp_quantile(
    Finv: StepCDF | QuantileProfile,
    Ginv: StepCDF | QuantileProfile,
    p: float,
    n_quad: int = DEFAULT_N_QUAD,
    tol: float = 1e-10,
) -> float:
    """∫₀¹|F⁻¹ − G⁻¹|ᵖ: точно для пари StepCDF, інакше правило середніх точок.

    На кінцях, позначених ``divergent``, крайня панель уточнюється геометрично;
    неінтегровна розбіжність повертає ``math.inf``.
    """
    _check_p(p)
    if isinstance(Finv, StepCDF) and isinstance(Ginv, StepCDF):
        return _wpp_step_exact(Finv, Ginv, p)
    if n_quad < 2:
        raise ValueError(f"n_quad={n_quad}: потрібно щонайменше 2 панелі")

    def integrand(u):
        return np.abs(quantile(Finv, u) - quantile(Ginv, u)) ** p

    h = 1.0 / n_quad
    mids = (np.arange(n_quad) + 0.5) * h
    vals = integrand(mids)
    total = float(np.sum(vals[1:-1]) * h)

    def midpoint_panel(lo: float, hi: float) -> float:
        return float(integrand(0.5 * (lo + hi))) * (hi - lo)

    for side, edge, panel_val, divergent in (
        ("lo", 0.0, vals[0], "divergent" in (_lower_tag(Finv), _lower_tag(Ginv))),
        ("hi", 1.0, vals[-1], "divergent" in (_upper_tag(Finv), _upper_tag(Ginv))),
    ):
        if not divergent:
            total += float(panel_val) * h
            continue
        # Панель [0, h] ділиться на [h/2, h], [h/4, h/2], ...
        value, status, k = geometric_tail(midpoint_panel, edge, h, side, tol)
        if status == DIVERGENT:
            logger.debug(f"W_p^p: неінтегровна розбіжність біля u={edge:g}")
            return math.inf
        if status != CONVERGED:
            logger.warning(f"W_p^p: уточнення біля u={edge:g} не збіглося за {k} поділів")
        total += value
    return total


def wasserstein_pp_sorted(x: Sequence[float], y: Sequence[float], p: float) -> float:
    """(1/n)Σ|x₍ᵢ₎ − y₍ᵢ₎|ᵖ для відсортованих копій."""
    _check_p(p)
    x_arr = np.asarray(x, dtype=float).ravel()
    y_arr = np.asarray(y, dtype=float).ravel()
    if x_arr.shape != y_arr.shape:
        raise ValueError(f"довжини вибірок різні: {x_arr.size} ≠ {y_arr.size}")
    if x_arr.size == 0:
        raise ValueError("порожні вибірки")
    value = float(np.mean(np.abs(np.sort(x_arr) - np.sort(y_arr)) ** p))
    if __debug__:
        paired = float(np.mean(np.abs(x_arr - y_arr) ** p))
        assert value <= paired * (1 + 1e-12) + 1e-300, "сортування збільшило ℓᵖ-відстань"
    return value


def wasserstein_pp_samples_vs_profile(
    x: Sequence[float], Finv: StepCDF | QuantileProfile, p: float, tol: float = 1e-10
) -> float:
    """Σᵢ ∫_{(i−1)/n}^{i/n} |x₍ᵢ₎ − F⁻¹(u)|ᵖ du, всі панелі одним векторним quad."""
    _check_p(p)
    xs = np.sort(np.asarray(x, dtype=float).ravel())
    n = xs.size
    if n == 0:
        raise ValueError("порожня вибірка")
    offsets = np.arange(n, dtype=float)

    def panel_integrand(t: float) -> np.ndarray:
        return np.abs(xs - quantile(Finv, (offsets + t) / n)) ** p / n

    res, _err, info = sp_integrate.quad_vec(panel_integrand, 0.0, 1.0, epsabs=tol, epsrel=1e-10, full_output=True)
    if not info.success:
        logger.warning(f"W_p^p(вибірка, профіль): quad_vec не збігся ({info.message})")
    return float(np.sum(res))


def wasserstein_pp_double_integral(F: StepCDF, G: StepCDF, p: float) -> float:
    """p(p−1)∬_{x<y} ([G(x)−F(y)]⁺ + [F(x)−G(y)]⁺)(y−x)^{p−2} dx dy, точно по прямокутниках.

    На прямокутнику x∈[a,b), y∈[c,d) обидві CDF сталі, а інтеграл ядра
    p(p−1)(y−x)^{p−2}·1_{x<y} дорівнює Φ(d−a) − Φ(d−b) − Φ(c−a) + Φ(c−b),
    де Φ(s) = max(s, 0)ᵖ. Крайні напівнескінченні комірки мають нульовий
    коефіцієнт, тому сумуємо лише скінченні.
    """
    _check_p(p, strict=True)
    knots = np.union1d(F.locations, G.locations)
    if knots.size < 2:
        return 0.0
    lo, hi = knots[:-1], knots[1:]
    F_c, G_c = F(lo), G(lo)

    def phi(s):
        return np.maximum(s, 0.0) ** p

    coeff = np.maximum(G_c[:, None] - F_c[None, :], 0.0) + np.maximum(F_c[:, None] - G_c[None, :], 0.0)
    a, b = lo[:, None], hi[:, None]
    c, d = lo[None, :], hi[None, :]
    kernel = phi(d - a) - phi(d - b) - phi(c - a) + phi(c - b)
    return float(np.sum(coeff * kernel))


def tail_fn(F: Callable, x):
    """1_{x≥0}(1 − F(x)) + 1_{x≤0}F(x); у x = 0 обидва доданки, тобто 1."""
    x_arr = np.asarray(x, dtype=float)
    f = np.asarray(F(x_arr), dtype=float)
    out = np.where(x_arr >= 0, 1.0 - f, 0.0) + np.where(x_arr <= 0, f, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def write_csv(path: str | Path, header: Sequence[str], rows) -> Path:
    """UTF-8, рядок заголовка, числа у форматі ``.17g``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
