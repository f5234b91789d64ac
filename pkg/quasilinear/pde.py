"""Детерміновані еталонні розв'язувачі.

``fd_solve`` — консервативна схема для ∂ₜF = ∂ₓ(½a(F)∂ₓF − B(F)) на
обрізаній області з умовами Діріхле. ``quantile_pde_solve`` — рівняння для
квантилів ∂ₜX = b(u) − ½∂ᵤ(a(u)/∂ᵤX) на внутрішній сітці u_k = k/(m+1).
Тут же швидкість дисипації W_p^p та перевірка тотожності дисипації.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import linalg

from setup_logger import setup_logger

from .measure import QuantileProfile, StepCDF, quantile, write_csv
from .model import CoefficientModel, check_conditions
from .stationary import stationary_profile

logger = setup_logger(__name__)

Scheme = Literal["explicit", "semi_implicit"]
Boundary = Literal["extrapolate", "no_flux"]
Flux = Literal["plain", "balanced"]

MONOTONE_SLACK = 1e-10
DT_FLOOR_EXPONENT = 30


@dataclass(frozen=True)
class GridSolution:
    x_grid: np.ndarray
    times: np.ndarray
    values: np.ndarray

    def slice(self, index: int) -> np.ndarray:
        return self.values[index]

    def to_csv(self, path: str | Path) -> Path:
        rows = ((t, x, f) for t, row in zip(self.times, self.values) for x, f in zip(self.x_grid, row))
        return write_csv(path, ("t", "x", "F"), rows)


@dataclass(frozen=True)
class QuantileSolution:
    u_grid: np.ndarray
    times: np.ndarray
    values: np.ndarray

    def profile(self, index: int) -> QuantileProfile:
        return QuantileProfile(self.u_grid, self.values[index], "divergent", "divergent")

    def to_csv(self, path: str | Path) -> Path:
        rows = ((t, u, x) for t, row in zip(self.times, self.values) for u, x in zip(self.u_grid, row))
        return write_csv(path, ("t", "u", "quantile"), rows)


def _output_steps(times: Sequence[float] | None, t_end: float) -> list[float]:
    extra = () if times is None else np.asarray(times, dtype=float).ravel()
    targets = sorted({0.0, float(t_end), *(float(t) for t in extra)})
    if targets[0] < 0 or targets[-1] > t_end + 1e-12:
        raise ValueError(f"моменти виводу мають лежати в [0, {t_end}]")
    return targets


# ---------------------------------------------------------------------------
# Скінченні різниці для F
# ---------------------------------------------------------------------------


def truncated_domain(
    F0: Callable, tol: float = 1e-8, step: float = 0.5, max_extent: float = 1e6
) -> tuple[float, float]:
    """[x_min, x_max], поза яким F0 < tol зліва та F0 > 1 − tol справа."""
    x_min = -step
    while float(F0(x_min)) >= tol:
        x_min -= step
        if x_min < -max_extent:
            raise ValueError("не вдалося обрізати ліве крило початкового розподілу")
    x_max = step
    while float(F0(x_max)) <= 1.0 - tol:
        x_max += step
        if x_max > max_extent:
            raise ValueError("не вдалося обрізати праве крило початкового розподілу")
    return x_min, x_max


def _check_cdf_slice(F: np.ndarray, step: int, t: float) -> None:
    if not np.all(np.isfinite(F)):
        raise RuntimeError(f"fd_solve: крок {step}, t={t:.6g}: нескінченні значення")
    drop = float(np.min(np.diff(F)))
    if drop < -MONOTONE_SLACK:
        raise RuntimeError(f"fd_solve: крок {step}, t={t:.6g}: втрата монотонності ({drop:.3g})")
    if float(np.min(F)) < -MONOTONE_SLACK or float(np.max(F)) > 1.0 + MONOTONE_SLACK:
        raise RuntimeError(f"fd_solve: крок {step}, t={t:.6g}: значення поза [0, 1]")


def fd_solve(
    model: CoefficientModel,
    x_grid: Sequence[float],
    f0: Sequence[float],
    dt: float,
    t_end: float,
    scheme: Scheme = "explicit",
    output_times: Sequence[float] | None = None,
) -> GridSolution:
    x = np.asarray(x_grid, dtype=float)
    F = np.array(f0, dtype=float)
    if x.ndim != 1 or x.size < 3 or F.shape != x.shape:
        raise ValueError(f"fd_solve: сітка {x.shape} та початкові значення {F.shape}")
    dx = float(x[1] - x[0])
    if dx <= 0 or not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
        raise ValueError("fd_solve: потрібна рівномірна зростаюча сітка")
    if np.any(np.diff(F) < 0) or F.min() < 0 or F.max() > 1:
        raise ValueError("fd_solve: F0 має бути неспадною зі значеннями в [0, 1]")
    if not dt > 0 or t_end < 0:
        raise ValueError(f"fd_solve: dt={dt}, t_end={t_end}")
    if scheme not in ("explicit", "semi_implicit"):
        raise ValueError(f"невідома схема {scheme!r}")

    a_max = model.a_max()
    if scheme == "explicit" and a_max > 0 and dt > dx * dx / a_max:
        raise ValueError(f"CFL: dt={dt:g} > Δx²/max a = {dx * dx / a_max:g}")
    if scheme == "semi_implicit":
        b_max = float(np.max(np.abs(model.b(np.linspace(0.0, 1.0, 1025)))))
        if dt * b_max > dx:
            raise ValueError(f"CFL (конвекція): dt={dt:g} > Δx/max|b| = {dx / b_max:g}")

    targets = _output_steps(output_times, t_end)
    n_steps = max(int(math.ceil(t_end / dt - 1e-9)), 0)
    h = t_end / n_steps if n_steps else 0.0
    record_at = {int(round(t / h)) if h else 0: t for t in targets}
    lam = h / dx

    def face_flux(F: np.ndarray) -> np.ndarray:
        Ff = 0.5 * (F[1:] + F[:-1])
        return 0.5 * model.a(Ff) * np.diff(F) / dx - model.B(Ff)

    def explicit_step(F: np.ndarray) -> np.ndarray:
        out = F.copy()
        out[1:-1] += lam * np.diff(face_flux(F))
        return out

    def semi_implicit_step(F: np.ndarray) -> np.ndarray:
        Ff = 0.5 * (F[1:] + F[:-1])
        d = 0.5 * model.a(Ff) * h / (dx * dx)
        conv = model.B(Ff)
        m = F.size
        ab = np.zeros((3, m))
        ab[1, :] = 1.0
        ab[1, 1:-1] += d[1:] + d[:-1]
        ab[0, 2:] = -d[1:]
        ab[2, :-2] = -d[:-1]
        rhs = F.copy()
        rhs[1:-1] -= lam * np.diff(conv)
        return linalg.solve_banded((1, 1), ab, rhs)

    step_fn = explicit_step if scheme == "explicit" else semi_implicit_step
    times, values = [], []
    if 0 in record_at:
        times.append(0.0)
        values.append(F.copy())
    for k in range(1, n_steps + 1):
        F = step_fn(F)
        _check_cdf_slice(F, k, k * h)
        if k in record_at:
            times.append(record_at[k])
            values.append(F.copy())
    logger.debug(f"fd_solve {model.name}: {scheme}, {x.size} вузлів, {n_steps} кроків")
    return GridSolution(x, np.array(times), np.array(values))


def grid_quantiles(solution: GridSolution, index: int, u: Sequence[float] | None = None) -> QuantileProfile:
    """Квантилі табличної CDF розв'язку в момент ``times[index]``."""
    grid = None if u is None else np.asarray(u, dtype=float)
    return QuantileProfile.from_grid_cdf(solution.x_grid, solution.values[index], grid)


# ---------------------------------------------------------------------------
# Квантильне рівняння
# ---------------------------------------------------------------------------


def quantile_grid(m: int) -> np.ndarray:
    return np.arange(1, m + 1) / (m + 1)


def quantile_pde_solve(
    model: CoefficientModel,
    Finv0: QuantileProfile | StepCDF,
    dt: float,
    t_end: float,
    m: int = 512,
    output_times: Sequence[float] | None = None,
    boundary: Boundary = "extrapolate",
    flux: Flux | None = None,
) -> QuantileSolution:
    """Явна схема з адаптивним кроком.

    ``plain``: потік на гранях q = a(u)·Δu/(X_{k+1} − X_k), швидкість вузла
    V_k = b(u_k) − (q_{k+½} − q_{k−½})/(2Δu); привидні потоки ``extrapolate``
    — лінійна екстраполяція двох сусідніх граней, ``no_flux`` — нуль.

    ``balanced`` (за E1): q = 2B(u_{k+½})·ΔΨ_k/ΔX_k, дрейф
    (B(u_{k+½}) − B(u_{k−½}))/Δu з гранями u_½ = Δu/2, u_{m+½} = 1 − Δu/2;
    привидні потоки 2B(u_½)·r_0 та 2B(u_{m+½})·r_last, де r = ΔΨ/ΔX.
    Профіль Ψ на сітці є нерухомою точкою схеми. Без ``flux`` обирається
    ``balanced``, якщо E1 виконується і замикання ``extrapolate``.

    Крок обмежено 0.5·min(ΔX)²/max a і ділиться навпіл, доки вузли не
    залишаться строго впорядкованими; нижче dt/2^DT_FLOOR_EXPONENT — помилка.
    """
    if m < 3:
        raise ValueError(f"m={m}: потрібно щонайменше 3 внутрішні вузли")
    if boundary not in ("extrapolate", "no_flux"):
        raise ValueError(f"невідоме замикання на кінцях {boundary!r}")
    if flux not in (None, "plain", "balanced"):
        raise ValueError(f"невідомий потік {flux!r}")
    if not dt > 0 or t_end < 0:
        raise ValueError(f"quantile_pde_solve: dt={dt}, t_end={t_end}")
    u = quantile_grid(m)
    du = 1.0 / (m + 1)
    X = np.asarray(quantile(Finv0, u), dtype=float).copy()
    if np.any(np.diff(X) <= 0):
        raise ValueError("quantile_pde_solve: початковий профіль має строго зростати на сітці")

    if flux is None:
        flux = "balanced" if boundary == "extrapolate" and check_conditions(model).e1.holds else "plain"
    elif flux == "balanced" and not check_conditions(model).e1.holds:
        raise ValueError(f"{model.name}: потік balanced потребує E1")

    a_face = np.asarray(model.a(0.5 * (u[1:] + u[:-1])), dtype=float)
    a_max = float(np.max(a_face)) if a_face.size else 0.0

    if flux == "balanced":
        faces = np.concatenate(([0.5 * du], 0.5 * (u[1:] + u[:-1]), [1.0 - 0.5 * du]))
        B_face = np.asarray(model.B(faces), dtype=float)
        drift = np.diff(B_face) / du
        two_B = 2.0 * B_face
        d_psi = np.diff(np.asarray(stationary_profile(model).psi(u), dtype=float))

        def velocity(X: np.ndarray) -> np.ndarray:
            r = d_psi / np.diff(X)
            q = two_B[1:-1] * r
            if boundary == "no_flux":
                q_lo = q_hi = 0.0
            else:
                q_lo, q_hi = two_B[0] * r[0], two_B[-1] * r[-1]
            return drift - 0.5 * np.diff(np.concatenate(([q_lo], q, [q_hi]))) / du

    else:
        b_node = np.asarray(model.b(u), dtype=float)

        def velocity(X: np.ndarray) -> np.ndarray:
            q = a_face * du / np.diff(X)
            if boundary == "no_flux":
                q_lo = q_hi = 0.0
            else:
                q_lo, q_hi = 2 * q[0] - q[1], 2 * q[-1] - q[-2]
            return b_node - 0.5 * np.diff(np.concatenate(([q_lo], q, [q_hi]))) / du

    logger.debug(f"quantile_pde_solve {model.name}: потік {flux}, замикання {boundary}, m={m}")
    targets = _output_steps(output_times, t_end)
    floor = dt / 2**DT_FLOOR_EXPONENT
    times, values = [0.0], [X.copy()]
    t = 0.0
    halvings_total = 0
    for target in targets[1:]:
        while t < target - 1e-13:
            gap = float(np.min(np.diff(X)))
            stable = 0.5 * gap * gap / a_max if a_max > 0 else math.inf
            h = min(dt, stable, target - t)
            V = velocity(X)
            while True:
                X_new = X + h * V
                if np.all(np.diff(X_new) > 0) and np.all(np.isfinite(X_new)):
                    break
                h /= 2
                halvings_total += 1
                if h < floor:
                    raise RuntimeError(
                        f"quantile_pde_solve: t={t:.6g}: втрата монотонності, крок {h:.3g} нижче порогу {floor:.3g}"
                    )
                logger.debug(f"t={t:.6g}: ділю крок навпіл до {h:.3g}")
            X = X_new
            t = target if target - (t + h) < 1e-13 else t + h
        times.append(target)
        values.append(X.copy())
    if halvings_total:
        logger.debug(f"quantile_pde_solve {model.name}: {halvings_total} поділів кроку")
    return QuantileSolution(u, np.array(times), np.array(values))


# ---------------------------------------------------------------------------
# Дисипація
# ---------------------------------------------------------------------------


def _slice_arrays(profile: QuantileProfile | np.ndarray, grid: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(profile, QuantileProfile):
        return profile.grid, profile.values
    if grid is None:
        raise ValueError("для масиву значень потрібна сітка u")
    return np.asarray(grid, dtype=float), np.asarray(profile, dtype=float)


def dissipation_rate(
    f_slice: QuantileProfile,
    g_slice: QuantileProfile,
    p: float,
    a: Callable | None = None,
    model: CoefficientModel | None = None,
) -> float:
    """(p(p−1)/2)·∫ a|F⁻¹−G⁻¹|^{p−2}(∂F⁻¹ − ∂G⁻¹)²/(∂F⁻¹·∂G⁻¹) du.

    Похідні — центральні різниці в серединах панелей сітки; a береться
    або явно, або з ``model``.
    """
    if not p >= 2:
        raise ValueError(f"p={p}: швидкість дисипації визначена для p ≥ 2")
    a_fn = a if a is not None else (model.a if model is not None else None)
    if a_fn is None:
        raise ValueError("потрібен коефіцієнт a або модель")
    u, x = _slice_arrays(f_slice, None)
    u_g, y = _slice_arrays(g_slice, None)
    if u.shape != u_g.shape or not np.array_equal(u, u_g):
        raise ValueError("профілі мають бути задані на спільній сітці")
    dx, dy = np.diff(x), np.diff(y)
    if np.any(dx <= 0) or np.any(dy <= 0):
        raise ValueError("профілі мають строго зростати для обчислення дисипації")
    du = np.diff(u)
    um = 0.5 * (u[1:] + u[:-1])
    fx, gy = dx / du, dy / du
    e = np.abs(x - y)
    e_face = 0.5 * (e[1:] + e[:-1])
    weight = e_face ** (p - 2) if p != 2 else 1.0
    integrand = np.asarray(a_fn(um), dtype=float) * weight * (fx - gy) ** 2 / (fx * gy)
    return float(0.5 * p * (p - 1) * np.sum(integrand * du))


def grid_wpp(x: np.ndarray, y: np.ndarray, p: float, du: float) -> float:
    """Σ Δu·|x_k − y_k|ᵖ на рівномірній сітці вузлів."""
    return float(du * np.sum(np.abs(np.asarray(x) - np.asarray(y)) ** p))


@dataclass(frozen=True)
class DissipationReport:
    t1: float
    t2: float
    p: float
    lhs: float
    rhs: float
    rel_err: float
    times: np.ndarray
    wpp: np.ndarray
    rates: np.ndarray

    def rows(self) -> list[tuple[float, float, float, float, float, float]]:
        return [(self.t1, self.t2, self.p, self.lhs, self.rhs, self.rel_err)]

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("t1", "t2", "p", "lhs", "rhs", "rel_err"), self.rows())

    def series_to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("t", "wpp", "rate"), zip(self.times, self.wpp, self.rates))


def dissipation_identity_check(
    model: CoefficientModel,
    Finv0: QuantileProfile | StepCDF,
    Ginv0: QuantileProfile | StepCDF,
    p: float = 2.0,
    dt: float = 1e-3,
    t1: float | None = None,
    t2: float = 1.0,
    m: int = 512,
    samples: int = 200,
) -> DissipationReport:
    """W_p^p(t₂) − W_p^p(t₁) проти −∫_{t₁}^{t₂} швидкості дисипації.

    Обидва профілі еволюціонують із потоком ``plain`` і замиканням ``no_flux``: для них
    напівдискретна тотожність точна, тож розбіжність — похибка за часом.
    """
    if not p >= 2:
        raise ValueError(f"p={p}: тотожність дисипації перевіряється для p ≥ 2")
    t1 = 10 * dt if t1 is None else float(t1)
    if not 0 < t1 < t2:
        raise ValueError(f"потрібно 0 < t1 < t2, отримано t1={t1}, t2={t2}")
    if samples < 2:
        raise ValueError(f"samples={samples}: потрібно щонайменше 2 моменти")
    sample_times = np.linspace(t1, t2, samples + 1)
    sol_f = quantile_pde_solve(model, Finv0, dt, t2, m, sample_times, boundary="no_flux", flux="plain")
    sol_g = quantile_pde_solve(model, Ginv0, dt, t2, m, sample_times, boundary="no_flux", flux="plain")
    du = 1.0 / (m + 1)

    keep = np.isin(sol_f.times, sample_times)
    times = sol_f.times[keep]
    vals_f, vals_g = sol_f.values[keep], sol_g.values[keep]
    wpp = np.array([grid_wpp(x, y, p, du) for x, y in zip(vals_f, vals_g)])
    rates = np.array(
        [
            dissipation_rate(QuantileProfile(sol_f.u_grid, x), QuantileProfile(sol_f.u_grid, y), p, model=model)
            for x, y in zip(vals_f, vals_g)
        ]
    )
    lhs = float(wpp[-1] - wpp[0])
    rhs = float(-np.trapezoid(rates, times))
    scale = max(abs(lhs), np.finfo(float).tiny)
    rel_err = 0.0 if lhs == rhs else abs(lhs - rhs) / scale
    logger.info(f"дисипація {model.name}, p={p:g}: lhs={lhs:.6g}, rhs={rhs:.6g}, відносна похибка {rel_err:.3g}")
    return DissipationReport(t1, t2, float(p), lhs, rhs, rel_err, times, wpp, rates)


def weighted_l2(
    F: Callable | Sequence[float],
    G: Callable | Sequence[float],
    p_inf_density: Callable | Sequence[float],
    x_grid: Sequence[float],
) -> float:
    """Трапеція від (F − G)²/p_∞ на сітці x."""
    x = np.asarray(x_grid, dtype=float)

    def on_grid(obj) -> np.ndarray:
        return np.asarray(obj(x) if callable(obj) else obj, dtype=float)

    dens = on_grid(p_inf_density)
    if np.any(dens <= 0):
        k = int(np.argmin(dens))
        raise ValueError(f"щільність p_∞ недодатна у вузлі x={x[k]:.6g} ({dens[k]:.3g})")
    diff = on_grid(F) - on_grid(G)
    return float(np.trapezoid(diff * diff / dens, x))
