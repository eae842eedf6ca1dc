"""Run configuration with the standard desk-scale defaults, plus file/flag parsing."""
from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SimConfig(BaseModel):
    """All knobs of one simulation run. Defaults are the standard parameter table."""

    model_config = ConfigDict(extra="forbid")

    vue_pairs: int = Field(10, ge=1)
    rbs: int = Field(15, ge=1)
    window_slots: int = Field(10, ge=1)
    horizon_s: float = Field(60.0, gt=0)
    slot_s: float = Field(1.0, gt=0)
    seed: int = 1
    scheme: Literal["proposed", "baseline", "both"] = "both"

    # radio
    carrier_freq_mhz: float = Field(800.0, gt=0)
    rb_bandwidth_hz: float = Field(180e3, gt=0)
    noise_dbm_per_hz: float = -174.0
    tx_power_dbm: float = 10.0
    target_sinr_db: float = 3.0
    pathloss_ref_db: float = 43.0
    pathloss_ref_dist_m: float = Field(100.0, gt=0)
    corner_loss_db: float = Field(15.0, ge=0)

    # traffic
    packet_bits: float = Field(12800.0, gt=0)   # 1600-byte packets
    arrival_rate_min: float = Field(5.0, ge=0)
    arrival_rate_max: float = Field(25.0, ge=0)

    # geometry / mobility
    building_breadth_m: float = Field(100.0, gt=0)
    blocks_x: int = Field(2, ge=1)
    blocks_y: int = Field(2, ge=1)
    lane_width_m: float = Field(3.5, gt=0)
    speed_kmh: float = Field(50.0, ge=0)
    min_pair_gap_m: float = Field(15.0, gt=0)
    max_pair_gap_m: float = Field(20.0, gt=0)
    turn_prob_straight: float = Field(0.5, ge=0)
    turn_prob_left: float = Field(0.25, ge=0)
    turn_prob_right: float = Field(0.25, ge=0)

    # clustering
    theta: float = 0.3
    sigma_d: float = Field(100.0, gt=0)
    epsilon_d: float = Field(100.0, gt=0)
    b_min: int = Field(2, ge=2)

    # matching game
    alpha: float = 1.0
    beta: float = 3.0
    count_max: int = Field(500, ge=1)
    rho_cap: float = Field(1.0, gt=0)
    cost_cap: float = Field(1e9, gt=0)
    vacancy_moves: bool = False

    # baseline
    baseline_tiles: int = Field(3, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "SimConfig":
        if self.beta <= self.alpha:
            raise ValueError(f"beta must exceed alpha (alpha={self.alpha}, beta={self.beta})")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.max_pair_gap_m < self.min_pair_gap_m:
            raise ValueError("max_pair_gap_m must be >= min_pair_gap_m")
        if self.arrival_rate_max < self.arrival_rate_min:
            raise ValueError("arrival_rate_max must be >= arrival_rate_min")
        if self.n_slots < self.window_slots:
            raise ValueError("horizon_s must cover at least one window of window_slots")
        return self

    @property
    def n_slots(self) -> int:
        return int(round(self.horizon_s / self.slot_s))

    @property
    def speed_mps(self) -> float:
        return self.speed_kmh / 3.6

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** ((self.tx_power_dbm - 30.0) / 10.0)

    @property
    def noise_w_per_hz(self) -> float:
        return 10.0 ** ((self.noise_dbm_per_hz - 30.0) / 10.0)

    @property
    def noise_w(self) -> float:
        return self.noise_w_per_hz * self.rb_bandwidth_hz

    @property
    def target_sinr(self) -> float:
        return 10.0 ** (self.target_sinr_db / 10.0)

    @property
    def turn_probs(self) -> tuple[float, float, float]:
        return (self.turn_prob_straight, self.turn_prob_left, self.turn_prob_right)


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> SimConfig:
    """Load a flat key/value YAML file, apply flag overrides, validate.

    Absent keys fall back to defaults; unknown keys and out-of-range values
    raise with the offending key named.
    """
    data: dict = {}
    if path is not None:
        raw = Path(path).read_text(encoding="utf-8")
        loaded = yaml.safe_load(raw)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {path} must be a flat key/value mapping")
        data.update(loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return SimConfig(**data)
