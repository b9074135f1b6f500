"""Seeded Monte-Carlo sweeps and the theory-check report.

Every sweep point is independent: its random stream derives from
``SeedSequence((master_seed, sweep_value, replicate))``, so a single point
rerun in isolation reproduces its row bit-for-bit regardless of the rest of
the grid.  Row assembly sorts by sweep value, making the CSV independent of
execution order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from statistics import mean, stdev
from typing import Sequence

import numpy as np

from . import __version__
from .core import BasePolicy, MessagePool, PolicyParams, RewardParams, TypeDistribution, category_mass
from .datagen import GenerationConfig, SufficientStats, sample_dataset
from .errors import InvalidParameterError
from .fitting import FitResult, FitSettings, fit_dpo, fit_il, fit_rlpo, fit_slic
from .theory import (
    FailurePrediction,
    default_eta,
    event_eta_holds,
    event_il_holds,
    predict_rlpo_failure,
)

__all__ = [
    "ALGORITHMS",
    "ExperimentConfig",
    "CurvePoint",
    "Curve",
    "EventRate",
    "TheoryReport",
    "fit_algorithm",
    "run_rlpo_dpo_sweep",
    "run_il_sweep",
    "run_slic_sweep",
    "run_theory_check",
    "replicate_rng",
    "curve_to_csv",
    "curve_metadata",
]

ALGORITHMS = ("rlpo", "dpo", "il", "slic")

DEFAULT_DATA_GRID = (100, 316, 1000, 3162, 10000)
DEFAULT_M2_GRID = (10, 100, 1000, 10000)

CSV_HEADER = "sweep_value,mean_p_m1,stderr_p_m1,n_seeds,minimizer_exists_rate"


@dataclass(frozen=True)
class ExperimentConfig:
    """A resolved sweep definition; defaults follow the simulated setup."""

    algorithm: str = "rlpo"
    pool_m1: int = 10
    pool_m2: int = 100
    base_mass1: float = 0.8
    p1: float = 0.6
    beta: float = 1.0
    delta: float = 1.0
    set_size: int = 2
    num_data: int = 100000
    data_grid: tuple[int, ...] = DEFAULT_DATA_GRID
    m2_grid: tuple[int, ...] = DEFAULT_M2_GRID
    num_seeds: int = 100
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameterError(
                f"algorithm: must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        object.__setattr__(self, "data_grid", tuple(int(v) for v in self.data_grid))
        object.__setattr__(self, "m2_grid", tuple(int(v) for v in self.m2_grid))
        checks = [
            (self.pool_m1 >= 1, "pool_m1: must be >= 1"),
            (self.pool_m2 >= 1, "pool_m2: must be >= 1"),
            (0.0 < self.base_mass1 < 1.0, "base_mass1: must be in (0, 1)"),
            (0.0 < self.p1 < 1.0, "p1: must be in (0, 1)"),
            (self.beta >= 0.0, "beta: must be nonnegative"),
            (self.delta > 0.0, "delta: must be positive"),
            (self.set_size >= 2, "set_size: must be >= 2"),
            (self.num_data >= 1, "num_data: must be >= 1"),
            (len(self.data_grid) > 0, "data_grid: must be nonempty"),
            (all(v >= 1 for v in self.data_grid), "data_grid: values must be >= 1"),
            (len(self.m2_grid) > 0, "m2_grid: must be nonempty"),
            (all(v >= 1 for v in self.m2_grid), "m2_grid: values must be >= 1"),
            (self.num_seeds >= 1, "num_seeds: must be >= 1"),
            (self.master_seed >= 0, "master_seed: must be >= 0"),
        ]
        if self.algorithm == "slic":
            checks.append((self.set_size == 2, "set_size: slic requires set_size = 2"))
        if self.algorithm in ("rlpo", "dpo", "slic"):
            checks.append((self.beta > 0.0, "beta: must be positive for this algorithm"))
        for ok, message in checks:
            if not ok:
                raise InvalidParameterError(message)

    @property
    def pool(self) -> MessagePool:
        return MessagePool(self.pool_m1, self.pool_m2)

    @property
    def base(self) -> BasePolicy:
        return BasePolicy(self.base_mass1, self.pool)

    @property
    def p_star(self) -> TypeDistribution:
        return TypeDistribution(self.p1)

    @property
    def settings(self) -> FitSettings:
        return FitSettings(beta=self.beta, delta=self.delta)


@dataclass(frozen=True)
class CurvePoint:
    sweep_value: int
    mean_p_m1: float
    stderr_p_m1: float
    n_seeds: int
    minimizer_exists_rate: float


@dataclass(frozen=True)
class Curve:
    algorithm: str
    sweep_field: str
    points: tuple[CurvePoint, ...]
    config_hash: str


@dataclass(frozen=True)
class EventRate:
    """Observed frequency of the concentration events at one dataset size."""

    num_data: int
    eta: float | None
    eta_event_rate: float | None
    il_event_rate: float


@dataclass(frozen=True)
class TheoryReport:
    predictions: tuple[FailurePrediction, ...]
    event_rates: tuple[EventRate, ...]

    def render(self) -> str:
        lines = ["set_size,threshold,condition_holds,direction"]
        for p in self.predictions:
            lines.append(
                f"{p.set_size},{p.threshold!r},{str(p.condition_holds).lower()},{p.direction.value}"
            )
        lines.append("")
        lines.append("num_data,eta,eta_event_rate,il_event_rate")
        for e in self.event_rates:
            eta = "" if e.eta is None else repr(e.eta)
            eta_rate = "" if e.eta_event_rate is None else repr(e.eta_event_rate)
            lines.append(f"{e.num_data},{eta},{eta_rate},{e.il_event_rate!r}")
        return "\n".join(lines) + "\n"


def replicate_rng(master_seed: int, sweep_value: int, replicate: int) -> np.random.Generator:
    """Stream for one (sweep point, replicate) cell, independent of the grid."""
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, sweep_value, replicate))
    )


def config_hash(config: ExperimentConfig) -> str:
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def fit_algorithm(
    algorithm: str,
    stats: SufficientStats,
    base: BasePolicy,
    settings: FitSettings,
) -> FitResult:
    """Dispatch one fit; beta/delta come from the settings bundle."""
    if algorithm == "rlpo":
        return fit_rlpo(stats, base, settings.beta, settings)
    if algorithm == "dpo":
        return fit_dpo(stats, base, settings.beta, settings)
    if algorithm == "il":
        return fit_il(stats, base, settings.beta, settings)
    if algorithm == "slic":
        return fit_slic(stats, base, settings.beta, settings.delta, settings)
    raise InvalidParameterError(f"unknown algorithm {algorithm!r}")


def fitted_mass(result: FitResult, pool: MessagePool) -> float:
    """Category-1 mass of a fitted policy (reward fits are not accepted)."""
    params = result.params
    if isinstance(params, RewardParams):
        raise InvalidParameterError("expected policy parameters")
    assert isinstance(params, PolicyParams)
    return category_mass(params, pool)[0]


def _point(sweep_value: int, masses: Sequence[float], exists: Sequence[bool]) -> CurvePoint:
    n = len(masses)
    stderr = stdev(masses) / n**0.5 if n > 1 else 0.0
    return CurvePoint(sweep_value, mean(masses), stderr, n, mean(float(e) for e in exists))


def run_rlpo_dpo_sweep(config: ExperimentConfig) -> Curve:
    """Fitted P(M1) against dataset size for the reward-based algorithms."""
    if config.algorithm not in ("rlpo", "dpo"):
        raise InvalidParameterError("algorithm: expected rlpo or dpo")
    base, p_star, settings = config.base, config.p_star, config.settings
    points = []
    for num_data in sorted(set(config.data_grid)):
        gen = GenerationConfig(base, p_star, config.set_size, num_data)
        masses, exists = [], []
        for rep in range(config.num_seeds):
            stats = sample_dataset(gen, replicate_rng(config.master_seed, num_data, rep))
            result = fit_algorithm(config.algorithm, stats, base, settings)
            masses.append(fitted_mass(result, config.pool))
            exists.append(result.minimizer_exists)
        points.append(_point(num_data, masses, exists))
    return Curve(config.algorithm, "num_data", tuple(points), config_hash(config))


def _grow_m2_sweep(config: ExperimentConfig) -> Curve:
    base_cfg = config
    points = []
    for m2 in sorted(set(config.m2_grid)):
        cfg = replace(base_cfg, pool_m2=m2)
        base, settings = cfg.base, cfg.settings
        gen = GenerationConfig(base, cfg.p_star, cfg.set_size, cfg.num_data)
        masses, exists = [], []
        for rep in range(cfg.num_seeds):
            stats = sample_dataset(gen, replicate_rng(cfg.master_seed, m2, rep))
            result = fit_algorithm(cfg.algorithm, stats, base, settings)
            masses.append(fitted_mass(result, cfg.pool))
            exists.append(result.minimizer_exists)
        points.append(_point(m2, masses, exists))
    return Curve(config.algorithm, "pool_m2", tuple(points), config_hash(config))


def run_il_sweep(config: ExperimentConfig) -> Curve:
    """Fitted P(M1) against the size of the second category, inclusive fit."""
    if config.algorithm != "il":
        raise InvalidParameterError("algorithm: expected il")
    return _grow_m2_sweep(config)


def run_slic_sweep(config: ExperimentConfig) -> Curve:
    """Fitted P(M1) against the size of the second category, calibration fit."""
    if config.algorithm != "slic":
        raise InvalidParameterError("algorithm: expected slic")
    return _grow_m2_sweep(config)


def run_theory_check(
    config: ExperimentConfig, set_sizes: Sequence[int] = (2, 3, 4, 5)
) -> TheoryReport:
    """Failure predictions per set size, plus empirical event frequencies.

    Predictions span ``set_sizes``; the event frequencies are estimated at
    ``config.set_size`` for each dataset size in ``config.data_grid``.  The
    concentration-event margin eta is only defined where the failure
    condition holds strictly, so its column is empty otherwise.
    """
    base, p_star = config.base, config.p_star
    predictions = tuple(predict_rlpo_failure(base, p_star, k) for k in set_sizes)
    try:
        eta = default_eta(base, p_star, config.set_size)
    except InvalidParameterError:
        eta = None
    rates = []
    for num_data in sorted(set(config.data_grid)):
        gen = GenerationConfig(base, p_star, config.set_size, num_data)
        eta_hits = 0
        il_hits = 0
        for rep in range(config.num_seeds):
            stats = sample_dataset(gen, replicate_rng(config.master_seed, num_data, rep))
            if eta is not None and event_eta_holds(stats, eta):
                eta_hits += 1
            if event_il_holds(stats, config.beta, p_star):
                il_hits += 1
        rates.append(
            EventRate(
                num_data,
                eta,
                None if eta is None else eta_hits / config.num_seeds,
                il_hits / config.num_seeds,
            )
        )
    return TheoryReport(predictions, tuple(rates))


def curve_to_csv(curve: Curve) -> str:
    """Canonical CSV rendering; floats use shortest round-trip form."""
    lines = [CSV_HEADER]
    for p in curve.points:
        lines.append(
            f"{p.sweep_value},{p.mean_p_m1!r},{p.stderr_p_m1!r},{p.n_seeds},{p.minimizer_exists_rate!r}"
        )
    return "\n".join(lines) + "\n"


def curve_metadata(config: ExperimentConfig, curve: Curve) -> dict:
    """Sidecar payload: resolved config, its hash, and reproduction facts."""
    return {
        "algorithm": curve.algorithm,
        "sweep_field": curve.sweep_field,
        "config": asdict(config),
        "config_hash": curve.config_hash,
        "master_seed": config.master_seed,
        "seeds_per_point": config.num_seeds,
        "n_points": len(curve.points),
        "version": __version__,
    }
