"""HTTP facade: run single simulations or sweeps against the core engine."""
from __future__ import annotations

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import __version__
from .config import SimConfig
from .engine import Simulation, summarize
from .sweep import run_sweep

app = FastAPI(title="v2vzones", version=__version__)


class RunRequest(BaseModel):
    config: SimConfig = Field(default_factory=SimConfig)


class SummaryRow(BaseModel):
    scheme: str
    vue_pairs: int
    rbs: int
    seed: int
    satisfaction_pct: float
    outage_pct: float
    sinr_p25_db: float
    sinr_p50_db: float
    sinr_p75_db: float
    mean_zone_count: float
    mean_swap_evaluations: float | None
    mean_swaps_accepted: float | None
    windows: int


class RunResponse(BaseModel):
    rows: list[SummaryRow]


class SweepRequest(BaseModel):
    config: SimConfig = Field(default_factory=SimConfig)
    vue_pairs: list[int] = Field(default_factory=lambda: [10])
    rbs: list[int] = Field(default_factory=lambda: [15])
    seeds: list[int] = Field(default_factory=lambda: [1])
    dump_matrices: bool = False


class SweepResponse(BaseModel):
    rows: list[SummaryRow]
    files: dict[str, str]


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/config/defaults", response_model=SimConfig)
def config_defaults() -> SimConfig:
    return SimConfig()


@app.post("/simulate", response_model=RunResponse)
def simulate(req: RunRequest) -> RunResponse:
    cfg = req.config
    log = Simulation(cfg).run()
    rows = [SummaryRow(vue_pairs=cfg.vue_pairs, rbs=cfg.rbs, seed=cfg.seed, **vars(s))
            for s in summarize(log)]
    return RunResponse(rows=rows)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    result = run_sweep(req.config, req.vue_pairs, req.rbs, req.seeds,
                       req.dump_matrices)
    return SweepResponse(rows=[SummaryRow(**row) for row in result.rows],
                         files=result.files)
