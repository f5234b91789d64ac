"""Рангові системи частинок: взаємодійна, перевпорядкована та зчеплена пара.

Крок Ейлера–Маруями з коефіцієнтами, замороженими на рангах до кроку:

    Xᵢ ← Xᵢ + b(rankᵢ)·dt + (c_n + σ(rankᵢ))·√dt·Gᵢ

Перевпорядкована система робить той самий крок з рангом i/n для i-ї
порядкової статистики і потім сортує масив (проєкція на {y₁ ≤ … ≤ yₙ}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from setup_logger import setup_logger

from .measure import QuantileProfile, StepCDF, quantile, wasserstein_pp_sorted, write_csv
from .model import CoefficientModel

logger = setup_logger(__name__)

InitMode = Literal["iid", "stratified"]
Dynamics = Literal["interacting", "reordered"]

# Слова призначення для підпотоків шуму.
_INIT_PURPOSE = 0
_INCREMENT_PURPOSE = 1

CONTRACTION_SLACK = 1e-12


@dataclass(frozen=True)
class CnRule:
    """Правило для c_n: ``power`` — c₀·n^{−α}, ``explicit`` — задане значення."""

    kind: Literal["power", "explicit"] = "power"
    c0: float = 1.0
    alpha: float = 0.25
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("power", "explicit"):
            raise ValueError(f"невідоме правило c_n: {self.kind!r}")
        if self.kind == "power" and (self.c0 < 0 or self.alpha < 0):
            raise ValueError(f"c_n: c0={self.c0}, alpha={self.alpha} мають бути ≥ 0")
        if self.kind == "explicit" and not self.value >= 0:
            raise ValueError(f"c_n: значення {self.value} має бути ≥ 0")

    @classmethod
    def power(cls, c0: float = 1.0, alpha: float = 0.25) -> CnRule:
        return cls("power", c0=c0, alpha=alpha)

    @classmethod
    def explicit(cls, value: float) -> CnRule:
        return cls("explicit", value=value)

    def value_for(self, n: int) -> float:
        return self.c0 * n ** (-self.alpha) if self.kind == "power" else self.value


@dataclass(frozen=True)
class SimConfig:
    n: int
    dt: float
    t_end: float
    c_n_rule: CnRule = field(default_factory=CnRule.power)
    seed: int = 0
    init_mode: InitMode = "iid"
    snapshot_times: tuple[float, ...] = ()
    dynamics: Dynamics = "interacting"

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n={self.n}: потрібна щонайменше одна частинка")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt={self.dt}: крок має бути додатним")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end={self.t_end}: горизонт має бути ≥ 0")
        if self.init_mode not in ("iid", "stratified"):
            raise ValueError(f"невідомий режим ініціалізації {self.init_mode!r}")
        if self.dynamics not in ("interacting", "reordered"):
            raise ValueError(f"невідома динаміка {self.dynamics!r}")
        times = tuple(float(t) for t in self.snapshot_times)
        if list(times) != sorted(times):
            raise ValueError("snapshot_times мають бути відсортовані")
        if times and (times[0] < 0 or times[-1] > self.t_end + 1e-12):
            raise ValueError(f"snapshot_times мають лежати в [0, {self.t_end}]")
        object.__setattr__(self, "snapshot_times", times)

    @property
    def c_n(self) -> float:
        return self.c_n_rule.value_for(self.n)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    def snapshot_steps(self) -> dict[int, float]:
        return {int(round(t / self.dt)): t for t in self.snapshot_times}


class NoiseStream:
    """Лічильникові підпотоки Philox від головного зерна.

    Блок k — підпотік кроку k; елемент i блоку k — гаусів приріст частинки
    (рангу) i на кроці k, незалежно від того, скільки елементів запитано.
    Початкові рівномірні величини мають окреме слово призначення, тож не
    перетинаються з приростами.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)

    def _generator(self, purpose: int, index: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(purpose, index))
        return np.random.Generator(np.random.Philox(seq))

    def uniforms(self, n: int) -> np.ndarray:
        return self._generator(_INIT_PURPOSE, 0).random(n)

    def gaussians(self, step: int, n: int) -> np.ndarray:
        return self._generator(_INCREMENT_PURPOSE, step).standard_normal(n)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Ensemble:
    time: float
    positions: np.ndarray
    c_n: float
    model: CoefficientModel
    step: int = 0

    def __post_init__(self) -> None:
        positions = _frozen(self.positions)
        if positions.ndim != 1 or positions.size == 0:
            raise ValueError("Ensemble: позиції мають бути непорожнім одновимірним масивом")
        object.__setattr__(self, "positions", positions)

    @property
    def n(self) -> int:
        return self.positions.size

    def empirical(self) -> StepCDF:
        return StepCDF.from_samples(self.positions)


@dataclass(frozen=True, eq=False)
class CoupledState:
    """Дві впорядковані системи з однаковими гаусовими приростами на кожен ранг."""

    time: float
    y_f: np.ndarray
    y_g: np.ndarray
    c_n: float
    model: CoefficientModel
    noise: NoiseStream | None = None
    step: int = 0

    def __post_init__(self) -> None:
        y_f, y_g = _frozen(self.y_f), _frozen(self.y_g)
        if y_f.shape != y_g.shape or y_f.ndim != 1:
            raise ValueError(f"CoupledState: розміри {y_f.shape} та {y_g.shape} не збігаються")
        if np.any(np.diff(y_f) < 0) or np.any(np.diff(y_g) < 0):
            raise ValueError("CoupledState: обидва масиви мають бути впорядковані")
        object.__setattr__(self, "y_f", y_f)
        object.__setattr__(self, "y_g", y_g)

    @property
    def n(self) -> int:
        return self.y_f.size

    def wpp(self, p: float) -> float:
        return wasserstein_pp_sorted(self.y_f, self.y_g, p)


def rank_fractions(positions: Sequence[float]) -> np.ndarray:
    """rankᵢ = #{j : Xⱼ ≤ Xᵢ}/n; рівні позиції впорядковано за індексом частинки."""
    x = np.asarray(positions, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size)
    ranks[order] = np.arange(1, x.size + 1)
    return ranks / x.size


def _check_gaussians(gaussians: np.ndarray, n: int) -> np.ndarray:
    g = np.asarray(gaussians, dtype=float)
    if g.shape != (n,):
        raise ValueError(f"потрібно {n} гаусових приростів, отримано форму {g.shape}")
    return g


def em_step(ensemble: Ensemble, dt: float, gaussians: np.ndarray) -> Ensemble:
    g = _check_gaussians(gaussians, ensemble.n)
    model = ensemble.model
    ranks = rank_fractions(ensemble.positions)
    vol = ensemble.c_n + model.sigma(ranks)
    new = ensemble.positions + model.b(ranks) * dt + vol * math.sqrt(dt) * g
    return Ensemble(ensemble.time + dt, new, ensemble.c_n, model, ensemble.step + 1)


def _rank_update(y: np.ndarray, model: CoefficientModel, c_n: float, dt: float, g: np.ndarray) -> np.ndarray:
    levels = np.arange(1, y.size + 1) / y.size
    return np.sort(y + model.b(levels) * dt + (c_n + model.sigma(levels)) * math.sqrt(dt) * g)


def reordered_step(state: CoupledState | Ensemble, dt: float, gaussians: np.ndarray):
    g = _check_gaussians(gaussians, state.n)
    if isinstance(state, CoupledState):
        return CoupledState(
            state.time + dt,
            _rank_update(state.y_f, state.model, state.c_n, dt, g),
            _rank_update(state.y_g, state.model, state.c_n, dt, g),
            state.c_n,
            state.model,
            state.noise,
            state.step + 1,
        )
    if np.any(np.diff(state.positions) < 0):
        raise ValueError("reordered_step: позиції мають бути впорядковані")
    new = _rank_update(state.positions, state.model, state.c_n, dt, g)
    return Ensemble(state.time + dt, new, state.c_n, state.model, state.step + 1)


def _check_monotone_quantile(values: np.ndarray, sorted_u: bool) -> None:
    if sorted_u and np.any(np.diff(values) < 0):
        raise ValueError("квантильна функція початкового розподілу не є неспадною")


def init_ensemble(
    model: CoefficientModel,
    quantile_of_m: QuantileProfile | StepCDF,
    config: SimConfig,
    uniforms: np.ndarray | None = None,
) -> Ensemble:
    """Початкові позиції m⁻¹(Uᵢ); у режимі ``stratified`` U впорядковані."""
    if uniforms is None:
        uniforms = NoiseStream(config.seed).uniforms(config.n)
    u = np.asarray(uniforms, dtype=float)
    if u.shape != (config.n,):
        raise ValueError(f"потрібно {config.n} рівномірних величин, отримано форму {u.shape}")
    order = np.argsort(u, kind="stable")
    values_sorted = np.asarray(quantile(quantile_of_m, u[order]), dtype=float)
    _check_monotone_quantile(values_sorted, sorted_u=True)
    if config.init_mode == "stratified":
        positions = values_sorted
    else:
        positions = np.empty(config.n)
        positions[order] = values_sorted
    return Ensemble(0.0, positions, config.c_n, model)


@dataclass(frozen=True)
class SnapshotSeries:
    snapshots: tuple[Ensemble, ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def initial(self) -> Ensemble:
        return self.snapshots[0]

    @property
    def final(self) -> Ensemble:
        return self.snapshots[-1]

    def at(self, t: float) -> Ensemble:
        return self.snapshots[int(np.argmin(np.abs(self.times - t)))]

    def __len__(self) -> int:
        return len(self.snapshots)

    def to_csv(self, path: str | Path) -> Path:
        rows = ((s.time, i, x) for s in self.snapshots for i, x in enumerate(s.positions))
        return write_csv(path, ("t", "i", "position"), rows)


def _check_finite(positions: np.ndarray, step: int, t: float) -> None:
    bad = int(np.count_nonzero(~np.isfinite(positions)))
    if bad:
        raise RuntimeError(f"крок {step}, t={t:.6g}: {bad} нескінченних/NaN позицій частинок")


def simulate(model: CoefficientModel, quantile_of_m: QuantileProfile | StepCDF, config: SimConfig) -> SnapshotSeries:
    noise = NoiseStream(config.seed)
    ens = init_ensemble(model, quantile_of_m, config, noise.uniforms(config.n))
    if config.dynamics == "reordered":
        ens = Ensemble(ens.time, np.sort(ens.positions), ens.c_n, model)
        step_fn = reordered_step
    else:
        step_fn = em_step

    wanted = config.snapshot_steps()
    snapshots = [ens]
    n_steps = config.n_steps
    logger.debug(f"{model.name}: {config.dynamics}, n={config.n}, {n_steps} кроків, c_n={config.c_n:.4g}")
    for k in range(1, n_steps + 1):
        ens = step_fn(ens, config.dt, noise.gaussians(k, config.n))
        _check_finite(ens.positions, k, ens.time)
        if k in wanted:
            snapshots.append(ens)
    if n_steps not in wanted and n_steps > 0 and not config.snapshot_times:
        snapshots.append(ens)
    return SnapshotSeries(tuple(snapshots))


@dataclass(frozen=True)
class ContractionTable:
    """Послідовності W_p^p по кроках для зчеплених впорядкованих систем."""

    step_times: np.ndarray
    step_values: dict[float, np.ndarray]
    snapshot_times: tuple[float, ...]

    def max_increase(self, p: float) -> float:
        """Найбільше перевищення монотонності: ≤ 0, якщо послідовність не зростає."""
        v = self.step_values[p]
        if v.size < 2:
            return -math.inf
        excess = np.diff(v) - CONTRACTION_SLACK * (1.0 + v[:-1])
        return float(np.max(excess))

    def is_pathwise_nonincreasing(self) -> bool:
        return all(self.max_increase(p) <= 0 for p in self.step_values)

    def rows(self) -> list[tuple[float, float, float]]:
        out = []
        for t in self.snapshot_times:
            k = int(np.argmin(np.abs(self.step_times - t)))
            for p, values in self.step_values.items():
                out.append((float(self.step_times[k]), float(p), float(values[k])))
        return out

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ("t", "p", "wpp"), self.rows())


def coupled_contraction_run(
    model: CoefficientModel,
    F0inv: QuantileProfile | StepCDF,
    G0inv: QuantileProfile | StepCDF,
    config: SimConfig,
    p_list: Sequence[float],
) -> ContractionTable:
    """Обидві системи стартують з тих самих впорядкованих рівномірних величин."""
    p_values = [float(p) for p in p_list]
    if not p_values:
        raise ValueError("порожній список p")
    for p in p_values:
        if not p >= 1:
            raise ValueError(f"p={p}: потрібне p ≥ 1")

    noise = NoiseStream(config.seed)
    u = np.sort(noise.uniforms(config.n))
    y_f = np.asarray(quantile(F0inv, u), dtype=float)
    y_g = np.asarray(quantile(G0inv, u), dtype=float)
    _check_monotone_quantile(y_f, sorted_u=True)
    _check_monotone_quantile(y_g, sorted_u=True)
    state = CoupledState(0.0, y_f, y_g, config.c_n, model, noise)

    n_steps = config.n_steps
    times = np.empty(n_steps + 1)
    values = {p: np.empty(n_steps + 1) for p in p_values}
    times[0] = 0.0
    for p in p_values:
        values[p][0] = state.wpp(p)
    for k in range(1, n_steps + 1):
        state = reordered_step(state, config.dt, noise.gaussians(k, config.n))
        _check_finite(state.y_f, k, state.time)
        _check_finite(state.y_g, k, state.time)
        times[k] = state.time
        for p in p_values:
            values[p][k] = state.wpp(p)

    snapshot_times = config.snapshot_times or (0.0, float(times[-1]))
    table = ContractionTable(times, values, tuple(snapshot_times))
    for p in p_values:
        if table.max_increase(p) > 0:
            logger.warning(f"W_{p:g}^{p:g} зросла на кроці: перевищення {table.max_increase(p):.3g}")
    return table
