"""Конфігурація сценаріїв: JSON → незмінні dataclass-и з перевіркою діапазонів."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import stats

from quasilinear.measure import QuantileProfile, StepCDF
from quasilinear.model import CoefficientModel, builtin_from_spec
from quasilinear.particle import CnRule, SimConfig
from quasilinear.stationary import stationary_cdf
from setup_logger import setup_logger

logger = setup_logger(__name__)

SCENARIOS = ("contraction", "equilibrium", "chaos", "dissipation", "stationary_audit")
DISTRIBUTIONS = ("gaussian", "uniform", "dirac", "step", "stationary")


def _positive(name: str, value: Any) -> float:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name}={value!r}: очікується додатне скінченне число")
    return float(value)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)

    def build(self) -> CoefficientModel:
        return builtin_from_spec(self.name, self.params)


@dataclass(frozen=True)
class DistributionSpec:
    """Початковий розподіл: ``kind`` плюс параметри цього виду."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in DISTRIBUTIONS:
            raise ValueError(f"невідомий розподіл {self.kind!r}; доступні: {', '.join(DISTRIBUTIONS)}")
        p = self.params
        if self.kind == "gaussian":
            _positive("std", p.get("std", 1.0))
        elif self.kind == "uniform" and not float(p.get("lo", 0.0)) < float(p.get("hi", 1.0)):
            raise ValueError(f"uniform: потрібно lo < hi, отримано {p}")
        elif self.kind == "step" and ("locations" not in p or "masses" not in p):
            raise ValueError("step: потрібні ключі locations та masses")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DistributionSpec:
        data = dict(data)
        try:
            kind = data.pop("kind")
        except KeyError as exc:
            raise ValueError("розподіл без ключа 'kind'") from exc
        return cls(kind, data)

    def quantile(self, model: CoefficientModel) -> QuantileProfile | StepCDF:
        p = self.params
        if self.kind == "gaussian":
            mean, std = float(p.get("mean", 0.0)), float(p.get("std", 1.0))
            return QuantileProfile.from_function(
                lambda u: mean + std * stats.norm.ppf(u), lower="divergent", upper="divergent"
            )
        if self.kind == "uniform":
            lo, hi = float(p.get("lo", 0.0)), float(p.get("hi", 1.0))
            return QuantileProfile.from_function(lambda u: lo + (hi - lo) * np.asarray(u))
        if self.kind == "dirac":
            return StepCDF.dirac(float(p.get("at", 0.0)))
        if self.kind == "step":
            return StepCDF.from_atoms(p["locations"], p["masses"])
        return stationary_cdf(model, float(p.get("xbar", 0.0))).quantile_profile()

    def cdf(self, model: CoefficientModel) -> Callable:
        p = self.params
        if self.kind == "gaussian":
            mean, std = float(p.get("mean", 0.0)), float(p.get("std", 1.0))
            return lambda x: stats.norm.cdf((np.asarray(x) - mean) / std)
        if self.kind == "uniform":
            lo, hi = float(p.get("lo", 0.0)), float(p.get("hi", 1.0))
            return lambda x: np.clip((np.asarray(x) - lo) / (hi - lo), 0.0, 1.0)
        if self.kind in ("dirac", "step"):
            return self.quantile(model)
        return stationary_cdf(model, float(p.get("xbar", 0.0)))


@dataclass(frozen=True)
class ParticleSpec:
    n: int = 1000
    dt: float = 1e-3
    t_end: float = 1.0
    c_n: dict[str, Any] = field(default_factory=lambda: {"rule": "power", "c0": 1.0, "alpha": 0.25})
    init_mode: str = "iid"
    dynamics: str = "interacting"
    snapshot_times: tuple[float, ...] = ()
    seeds: int = 1
    n_list: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.seeds, int) or self.seeds < 1:
            raise ValueError(f"seeds={self.seeds!r}: потрібне ціле ≥ 1")
        for n in self.n_list:
            if not isinstance(n, int) or n < 1:
                raise ValueError(f"n_list містить некоректне n={n!r}")
        self.cn_rule()  # перевірка правила c_n

    def cn_rule(self) -> CnRule:
        spec = dict(self.c_n)
        rule = spec.pop("rule", "power")
        if rule == "power":
            return CnRule.power(float(spec.get("c0", 1.0)), float(spec.get("alpha", 0.25)))
        if rule == "explicit":
            return CnRule.explicit(float(spec.get("value", 0.0)))
        raise ValueError(f"невідоме правило c_n {rule!r}")

    def sim_config(self, seed: int, n: int | None = None, snapshot_times: tuple[float, ...] | None = None) -> SimConfig:
        return SimConfig(
            n=n or self.n,
            dt=self.dt,
            t_end=self.t_end,
            c_n_rule=self.cn_rule(),
            seed=seed,
            init_mode=self.init_mode,
            snapshot_times=self.snapshot_times if snapshot_times is None else snapshot_times,
            dynamics=self.dynamics,
        )


@dataclass(frozen=True)
class PdeSpec:
    dx: float = 0.02
    dt: float | None = None
    scheme: str = "explicit"
    x_min: float | None = None
    x_max: float | None = None
    m: int = 512
    quantile_dt: float = 1e-3
    t1: float | None = None
    t2: float = 1.0
    samples: int = 200
    truncation_tol: float = 1e-8

    def __post_init__(self) -> None:
        _positive("pde.dx", self.dx)
        _positive("pde.quantile_dt", self.quantile_dt)
        _positive("pde.t2", self.t2)
        if self.dt is not None:
            _positive("pde.dt", self.dt)
        if self.scheme not in ("explicit", "semi_implicit"):
            raise ValueError(f"pde.scheme={self.scheme!r}: explicit або semi_implicit")
        if not isinstance(self.m, int) or self.m < 3:
            raise ValueError(f"pde.m={self.m!r}: потрібне ціле ≥ 3")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: ModelSpec
    initial: DistributionSpec = field(default_factory=lambda: DistributionSpec("gaussian"))
    initial_g: DistributionSpec | None = None
    particle: ParticleSpec = field(default_factory=ParticleSpec)
    pde: PdeSpec = field(default_factory=PdeSpec)
    p_list: tuple[float, ...] = (1.0, 2.0)
    seed: int = 0
    output_dir: str | None = None
    trend_slack: float = 0.02
    max_rel_err: float = 0.05

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"невідомий сценарій {self.scenario!r}; доступні: {', '.join(SCENARIOS)}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed={self.seed!r}: потрібне невід'ємне ціле")
        for p in self.p_list:
            if not p >= 1:
                raise ValueError(f"p={p}: потрібне p ≥ 1")
        if self.scenario in ("contraction", "dissipation") and self.initial_g is None:
            raise ValueError(f"{self.scenario}: потрібен другий початковий розподіл initial_g")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        body = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, default=list)
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def with_overrides(self, seed: int | None = None, output_dir: str | None = None) -> ScenarioConfig:
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if output_dir is not None:
            changes["output_dir"] = output_dir
        return replace(self, **changes) if changes else self

    def seeds(self) -> list[int]:
        return [self.seed + k for k in range(self.particle.seeds)]


def _section(cls, data: dict[str, Any], name: str):
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValueError(f"{name}: некоректні ключі ({exc})") from exc


def parse_config(data: dict[str, Any]) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ValueError("конфігурація має бути JSON-об'єктом")
    data = dict(data)
    try:
        scenario = data.pop("scenario")
        model_data = data.pop("model")
    except KeyError as exc:
        raise ValueError(f"у конфігурації бракує ключа {exc}") from exc
    if not isinstance(model_data, dict) or "name" not in model_data:
        raise ValueError("model: очікується об'єкт з ключем 'name'")
    model = ModelSpec(model_data["name"], dict(model_data.get("params", {})))
    # Модель будується одразу: помилки параметрів мають з'явитися при розборі.
    model.build()

    kwargs: dict[str, Any] = {"scenario": scenario, "model": model}
    if "initial" in data:
        kwargs["initial"] = DistributionSpec.from_dict(data.pop("initial"))
    if "initial_g" in data:
        kwargs["initial_g"] = DistributionSpec.from_dict(data.pop("initial_g"))
    if "particle" in data:
        part = dict(data.pop("particle"))
        for key in ("snapshot_times", "n_list"):
            if key in part:
                part[key] = tuple(part[key])
        kwargs["particle"] = _section(ParticleSpec, part, "particle")
    if "pde" in data:
        kwargs["pde"] = _section(PdeSpec, dict(data.pop("pde")), "pde")
    if "p_list" in data:
        kwargs["p_list"] = tuple(float(p) for p in data.pop("p_list"))
    for key in ("seed", "output_dir", "trend_slack", "max_rel_err"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        raise ValueError(f"невідомі ключі конфігурації: {', '.join(sorted(data))}")
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ValueError(f"некоректна конфігурація: {exc}") from exc


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ValueError(f"файл конфігурації не знайдено: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: некоректний JSON ({exc})") from exc
    config = parse_config(data)
    logger.debug(f"конфігурація {path.name}: сценарій {config.scenario}, модель {config.model.name}")
    return config
