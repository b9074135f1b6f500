"""HTTP service exposing dataset generation, fitting, sweeps, and theory checks.

The compute lives in the library; this module is the wire format.  Responses
that feed files (stats text, sweep CSV) are rendered server-side so clients
can write the canonical bytes verbatim.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .core import PolicyParams, RewardParams, category_mass
from .datagen import GenerationConfig, SufficientStats, rho_stats, sample_dataset
from .errors import NumericError, SimulationError
from .fitting import fit_reward
from .experiments import (
    ExperimentConfig,
    curve_metadata,
    curve_to_csv,
    fit_algorithm,
    replicate_rng,
    run_il_sweep,
    run_rlpo_dpo_sweep,
    run_slic_sweep,
    run_theory_check,
)

app = FastAPI(title="prefsim", version=__version__)

Algorithm = Literal["rlpo", "dpo", "il", "slic"]


class ModelSpec(BaseModel):
    """Pool, base policy, and type distribution shared by most requests."""

    pool_m1: int = 10
    pool_m2: int = 100
    base_mass1: float = 0.8
    p1: float = 0.6


class GenerateRequest(ModelSpec):
    set_size: int = 2
    num_data: int = Field(gt=0)
    master_seed: int = 0


class GenerateResponse(BaseModel):
    stats_text: str
    set_size: int
    num_data: int
    rho_chosen: float
    rho_data: float


class FitRequest(ModelSpec):
    algorithm: Algorithm
    stats_text: str
    beta: float = 1.0
    delta: float = 1.0


class FitResponse(BaseModel):
    algorithm: Algorithm
    p_m1: float
    param_gap: float
    param_kind: Literal["reward", "policy"]
    loss: float
    converged: bool
    minimizer_exists: bool
    reward_gap: Optional[float] = None


class SweepRequest(ModelSpec):
    beta: float = 1.0
    delta: float = 1.0
    set_size: int = 2
    num_data: int = 100000
    data_grid: list[int] = []
    m2_grid: list[int] = []
    num_seeds: int = 100
    master_seed: int = 0


class CurveRow(BaseModel):
    sweep_value: int
    mean_p_m1: float
    stderr_p_m1: float
    n_seeds: int
    minimizer_exists_rate: float


class SweepResponse(BaseModel):
    algorithm: Algorithm
    sweep_field: str
    rows: list[CurveRow]
    csv_text: str
    config_hash: str
    metadata: dict


class TheoryRequest(ModelSpec):
    beta: float = 1.0
    set_size: int = 2
    set_sizes: list[int] = [2, 3, 4, 5]
    data_grid: list[int] = [100, 1000, 10000]
    num_seeds: int = 100
    master_seed: int = 0


class PredictionRow(BaseModel):
    set_size: int
    threshold: float
    condition_holds: bool
    direction: str


class EventRateRow(BaseModel):
    num_data: int
    eta: Optional[float]
    eta_event_rate: Optional[float]
    il_event_rate: float


class TheoryResponse(BaseModel):
    predictions: list[PredictionRow]
    event_rates: list[EventRateRow]
    report_text: str


@app.exception_handler(SimulationError)
async def simulation_error_handler(request: Request, exc: SimulationError) -> JSONResponse:
    status = 500 if isinstance(exc, NumericError) else 422
    return JSONResponse(status_code=status, content={"detail": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/datasets/generate", response_model=GenerateResponse)
def generate_dataset(req: GenerateRequest) -> GenerateResponse:
    config = ExperimentConfig(
        pool_m1=req.pool_m1,
        pool_m2=req.pool_m2,
        base_mass1=req.base_mass1,
        p1=req.p1,
        set_size=req.set_size,
        num_data=req.num_data,
        master_seed=req.master_seed,
    )
    gen = GenerationConfig(config.base, config.p_star, req.set_size, req.num_data)
    stats = sample_dataset(gen, replicate_rng(req.master_seed, req.num_data, 0))
    rho_chosen, rho_data = rho_stats(stats)
    return GenerateResponse(
        stats_text=stats.to_text(),
        set_size=stats.set_size,
        num_data=stats.num_data,
        rho_chosen=rho_chosen,
        rho_data=rho_data,
    )


@app.post("/fit", response_model=FitResponse)
def fit(req: FitRequest) -> FitResponse:
    stats = SufficientStats.from_text(req.stats_text)
    config = ExperimentConfig(
        algorithm=req.algorithm,
        pool_m1=req.pool_m1,
        pool_m2=req.pool_m2,
        base_mass1=req.base_mass1,
        p1=req.p1,
        beta=req.beta,
        delta=req.delta,
        set_size=stats.set_size,
        num_data=stats.num_data,
    )
    result = fit_algorithm(req.algorithm, stats, config.base, config.settings)
    params = result.params
    assert isinstance(params, PolicyParams)
    reward_gap = None
    if req.algorithm == "rlpo":
        reward_fit = fit_reward(stats, config.settings)
        assert isinstance(reward_fit.params, RewardParams)
        reward_gap = reward_fit.params.gap
    return FitResponse(
        algorithm=req.algorithm,
        p_m1=category_mass(params, config.pool)[0],
        param_gap=params.gap,
        param_kind="policy",
        loss=result.loss_value,
        converged=result.converged,
        minimizer_exists=result.minimizer_exists,
        reward_gap=reward_gap,
    )


def _sweep_config(algorithm: str, req: SweepRequest) -> ExperimentConfig:
    kwargs = dict(
        algorithm=algorithm,
        pool_m1=req.pool_m1,
        pool_m2=req.pool_m2,
        base_mass1=req.base_mass1,
        p1=req.p1,
        beta=req.beta,
        delta=req.delta,
        set_size=req.set_size,
        num_data=req.num_data,
        num_seeds=req.num_seeds,
        master_seed=req.master_seed,
    )
    if req.data_grid:
        kwargs["data_grid"] = tuple(req.data_grid)
    if req.m2_grid:
        kwargs["m2_grid"] = tuple(req.m2_grid)
    return ExperimentConfig(**kwargs)


@app.post("/sweeps/{algorithm}", response_model=SweepResponse)
def sweep(algorithm: Algorithm, req: SweepRequest) -> SweepResponse:
    config = _sweep_config(algorithm, req)
    if algorithm in ("rlpo", "dpo"):
        curve = run_rlpo_dpo_sweep(config)
    elif algorithm == "il":
        curve = run_il_sweep(config)
    else:
        curve = run_slic_sweep(config)
    rows = [CurveRow(**vars(p)) for p in curve.points]
    return SweepResponse(
        algorithm=algorithm,
        sweep_field=curve.sweep_field,
        rows=rows,
        csv_text=curve_to_csv(curve),
        config_hash=curve.config_hash,
        metadata=curve_metadata(config, curve),
    )


@app.post("/theory/check", response_model=TheoryResponse)
def theory_check(req: TheoryRequest) -> TheoryResponse:
    config = ExperimentConfig(
        pool_m1=req.pool_m1,
        pool_m2=req.pool_m2,
        base_mass1=req.base_mass1,
        p1=req.p1,
        beta=req.beta,
        set_size=req.set_size,
        data_grid=tuple(req.data_grid),
        num_seeds=req.num_seeds,
        master_seed=req.master_seed,
    )
    report = run_theory_check(config, req.set_sizes)
    return TheoryResponse(
        predictions=[
            PredictionRow(
                set_size=p.set_size,
                threshold=p.threshold,
                condition_holds=p.condition_holds,
                direction=p.direction.value,
            )
            for p in report.predictions
        ],
        event_rates=[EventRateRow(**vars(e)) for e in report.event_rates],
        report_text=report.render(),
    )
