"""Discrete-time orchestration: slot channel sampling, windowed zone formation,
RB apportionment and matching, metrics recording for both schemes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import (ZoneProblem, contiguous_pools, hare_niemeyer,
                         is_pairwise_stable, solve_zone_matching)
from .baseline import baseline_allocate, fixed_zone_partition
from .channel import pathloss_gain_matrix, sample_fading
from .clustering import (ZonePartition, affinity, cosine_load_similarity,
                         gaussian_distance_similarity, spectral_zones)
from .config import SimConfig
from .scenario import TurnPlanner, build_manhattan_grid, spawn_pairs, step_mobility


@dataclass
class ZoneRecord:
    """One zone's matching-game outcome at one scheduling instant."""

    window: int
    zone: int
    members: list[int]
    rb_pool: list[int]
    evaluations: int
    accepted: int
    converged: bool
    stable: bool
    utility: float
    cost: float
    satisfied: int
    load_sum: float


@dataclass
class WindowRecord:
    window: int
    zone_count: int
    labels: list[int]
    pool_sizes: list[int]
    served: int


@dataclass
class SchemeLog:
    scheme: str
    sinr_db: np.ndarray          # (slots, K) matched-RB SINR, -inf when unserved
    satisfied: np.ndarray        # (slots, K) bool
    slot_load: np.ndarray        # (slots, K) all-RB mean time load, clamped
    windows: list[WindowRecord] = field(default_factory=list)
    zone_records: list[ZoneRecord] = field(default_factory=list)
    matrix_dumps: list[tuple[int, dict]] = field(default_factory=list)


@dataclass
class MetricsLog:
    config: SimConfig
    formation_events: int
    proposed: SchemeLog | None = None
    baseline: SchemeLog | None = None

    def scheme_logs(self) -> list[SchemeLog]:
        return [s for s in (self.proposed, self.baseline) if s is not None]


class Simulation:
    """One seeded run; proposed and baseline schemes consume the same traces."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        streams = np.random.SeedSequence(cfg.seed).spawn(6)
        self.rng_scenario = np.random.default_rng(streams[0])
        self.rng_turns = np.random.default_rng(streams[1])
        self.rng_fading = np.random.default_rng(streams[2])
        self.rng_traffic = np.random.default_rng(streams[3])
        self.rng_cluster = np.random.default_rng(streams[4])
        self.rng_match = np.random.default_rng(streams[5])

        self.grid = build_manhattan_grid(cfg.building_breadth_m, cfg.blocks_x,
                                         cfg.blocks_y, cfg.lane_width_m)
        self.pairs = spawn_pairs(self.grid, cfg.vue_pairs, self.rng_scenario,
                                 cfg.speed_mps, (cfg.min_pair_gap_m, cfg.max_pair_gap_m),
                                 (cfg.arrival_rate_min, cfg.arrival_rate_max),
                                 cfg.packet_bits)
        self.vehicles = [v for p in self.pairs for v in (p.tx, p.rx)]
        self.planner = TurnPlanner(self.rng_turns, cfg.turn_probs)
        self.lam = np.array([p.arrival_rate for p in self.pairs])

    # -- geometry helpers -------------------------------------------------

    def _tx_xy(self) -> np.ndarray:
        return np.array([v.position for v in self.vehicles[0::2]])

    def _rx_xy(self) -> np.ndarray:
        return np.array([v.position for v in self.vehicles[1::2]])

    def _gain_matrix(self) -> np.ndarray:
        cfg = self.cfg
        return pathloss_gain_matrix(self._tx_xy(), self._rx_xy(), self.grid,
                                    cfg.pathloss_ref_db, cfg.pathloss_ref_dist_m,
                                    cfg.corner_loss_db)

    # -- per-slot evaluation ----------------------------------------------

    def _slot_eval(self, assign: np.ndarray, gains: np.ndarray, fading: np.ndarray,
                   phi: np.ndarray):
        """Realized SINR/satisfaction on matched RBs plus the all-RB mean load."""
        cfg = self.cfg
        k, n = len(assign), cfg.rbs
        pg = cfg.tx_power_w * gains[:, :, None] * fading      # (rx i, tx j, rb)
        total = np.zeros((k, n))
        for rb in range(n):
            mask = assign == rb
            if mask.any():
                total[:, rb] = pg[:, mask, rb].sum(axis=1)
        own = pg[np.arange(k), np.arange(k), :]               # (K, N)
        matched = np.zeros((k, n), dtype=bool)
        served = assign >= 0
        matched[served, assign[served]] = True
        interference = total - np.where(matched, own, 0.0)
        gamma_all = own / (interference + cfg.noise_w)

        gamma_m = np.where(served, gamma_all[np.arange(k), np.where(served, assign, 0)], 0.0)
        sat = gamma_m >= cfg.target_sinr
        with np.errstate(divide="ignore"):
            sinr_db = 10.0 * np.log10(gamma_m)

        rate_all = cfg.rb_bandwidth_hz * np.log2(1.0 + gamma_all)
        with np.errstate(divide="ignore"):
            rho_all = np.where(rate_all > 0, phi[:, None] / np.where(rate_all > 0, rate_all, 1.0),
                               np.inf)
        load = np.minimum(rho_all, cfg.rho_cap).mean(axis=1)
        return sinr_db, sat, load

    # -- window allocation ------------------------------------------------

    def _zone_problem(self, members: np.ndarray, gains: np.ndarray, phi: np.ndarray,
                      pool_size: int) -> ZoneProblem:
        cfg = self.cfg
        return ZoneProblem(gains[np.ix_(members, members)], phi[members], pool_size,
                           cfg.tx_power_w, cfg.noise_w, cfg.rb_bandwidth_hz,
                           cfg.target_sinr, cfg.rho_cap, cfg.cost_cap,
                           cfg.alpha, cfg.beta)

    def _allocate_proposed(self, window: int, partition: ZonePartition,
                           gains: np.ndarray, phi: np.ndarray,
                           zone_loads: list[float], log: SchemeLog) -> np.ndarray:
        cfg = self.cfg
        quotas = hare_niemeyer(zone_loads, cfg.rbs)
        pools = contiguous_pools(quotas)
        assign = np.zeros(cfg.vue_pairs, dtype=int)
        for zi, (zone, pool) in enumerate(zip(partition.zones, pools)):
            problem = self._zone_problem(zone, gains, phi, len(pool))
            result = solve_zone_matching(problem, self.rng_match, cfg.count_max,
                                         cfg.vacancy_moves)
            stable, _ = is_pairwise_stable(problem, result.assign)
            score = problem.score(result.assign)
            assign[zone] = pool[result.assign]
            log.zone_records.append(ZoneRecord(
                window, zi, zone.tolist(), pool.tolist(), result.evaluations,
                result.accepted, result.converged, stable, result.utility,
                score.cost, score.satisfied, score.load_sum))
        log.windows.append(WindowRecord(window, partition.zone_count,
                                        partition.labels.tolist(), quotas,
                                        cfg.vue_pairs))
        return assign

    def _proposed_partition(self, avg_pos: np.ndarray, history: np.ndarray,
                            collect: bool, window: int, log: SchemeLog) -> ZonePartition:
        cfg = self.cfg
        d = gaussian_distance_similarity(avg_pos, cfg.sigma_d, cfg.epsilon_d)
        c = cosine_load_similarity(history.T)
        a = affinity(c, d, cfg.theta)
        b_max = min(cfg.vue_pairs // 2, cfg.rbs)
        result = spectral_zones(a, cfg.b_min, b_max, self.rng_cluster)
        partition = result.partition
        # apportionment needs at least one RB per zone
        while partition.zone_count > cfg.rbs:
            zones = sorted(partition.zones, key=len)
            merged = np.concatenate([zones[0], zones[1]])
            rest = [z for z in zones[2:]]
            labels = np.zeros(cfg.vue_pairs, dtype=int)
            for idx, zone in enumerate([merged] + rest):
                labels[zone] = idx
            partition = ZonePartition.from_labels(labels)
        if collect:
            log.matrix_dumps.append((window, {
                "distance_sim": d, "load_sim": c, "affinity": a,
                "eigenvalues": result.eigenvalues}))
        return partition

    def _allocate_baseline(self, window: int, positions: np.ndarray,
                           loads: np.ndarray, log: SchemeLog) -> np.ndarray:
        cfg = self.cfg
        tiles = fixed_zone_partition(self.grid, cfg.baseline_tiles, positions)
        alloc = baseline_allocate(tiles, loads, cfg.rbs)
        log.windows.append(WindowRecord(window, tiles.zone_count,
                                        tiles.labels.tolist(), alloc.pool_sizes,
                                        alloc.served))
        return alloc.assign

    # -- main loop ---------------------------------------------------------

    def run(self, collect_matrices: bool = False) -> MetricsLog:
        cfg = self.cfg
        k, n_slots, t_win = cfg.vue_pairs, cfg.n_slots, cfg.window_slots
        do_prop = cfg.scheme in ("proposed", "both")
        do_base = cfg.scheme in ("baseline", "both")

        logs: dict[str, SchemeLog] = {}
        for name, active in (("proposed", do_prop), ("baseline", do_base)):
            if active:
                logs[name] = SchemeLog(name, np.zeros((n_slots, k)),
                                       np.zeros((n_slots, k), dtype=bool),
                                       np.zeros((n_slots, k)))

        phi = self.lam * cfg.packet_bits
        gains0 = self._gain_matrix()
        assign: dict[str, np.ndarray] = {}
        if do_prop:
            # bootstrap: provisional single zone over the whole pool, window 0
            single = ZonePartition.from_labels(np.zeros(k, dtype=int))
            assign["proposed"] = self._allocate_proposed(
                0, single, gains0, phi, [1.0], logs["proposed"])
        if do_base:
            assign["baseline"] = self._allocate_baseline(
                0, self._tx_xy(), phi, logs["baseline"])

        pos_sum = np.zeros((k, 2))
        gain_sum = np.zeros((k, k))
        history = {name: [] for name in logs}

        for t in range(1, n_slots + 1):
            self.vehicles = step_mobility(self.vehicles, self.grid, cfg.slot_s,
                                          self.planner)
            gains = self._gain_matrix()
            fading = sample_fading(self.rng_fading, (k, k, cfg.rbs))
            for name, log in logs.items():
                sinr_db, sat, load = self._slot_eval(assign[name], gains, fading, phi)
                log.sinr_db[t - 1] = sinr_db
                log.satisfied[t - 1] = sat
                log.slot_load[t - 1] = load
                history[name].append(load)
            pos_sum += self._tx_xy()
            gain_sum += gains

            if t % t_win == 0:
                window = t // t_win
                avg_pos = pos_sum / t_win
                avg_gains = gain_sum / t_win
                self.lam = self.rng_traffic.uniform(cfg.arrival_rate_min,
                                                    cfg.arrival_rate_max, size=k)
                phi_next = self.lam * cfg.packet_bits
                if do_prop:
                    hist = np.array(history["proposed"][-t_win:])
                    rho_bar = hist.mean(axis=0)
                    partition = self._proposed_partition(avg_pos, hist,
                                                         collect_matrices, window,
                                                         logs["proposed"])
                    zone_loads = [float(np.sum(rho_bar[z])) for z in partition.zones]
                    assign["proposed"] = self._allocate_proposed(
                        window, partition, avg_gains, phi_next, zone_loads,
                        logs["proposed"])
                if do_base:
                    rho_bar_b = np.array(history["baseline"][-t_win:]).mean(axis=0)
                    assign["baseline"] = self._allocate_baseline(
                        window, avg_pos, rho_bar_b, logs["baseline"])
                phi = phi_next
                pos_sum[:] = 0.0
                gain_sum[:] = 0.0

        return MetricsLog(cfg, n_slots // t_win,
                          logs.get("proposed"), logs.get("baseline"))


def run(cfg: SimConfig, collect_matrices: bool = False) -> MetricsLog:
    return Simulation(cfg).run(collect_matrices)


def percentile_nearest_rank(values, p: float) -> float:
    """Nearest-rank percentile on the sorted samples."""
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    if vals.size == 0:
        raise ValueError("no samples")
    idx = max(int(math.ceil(p / 100.0 * vals.size)), 1) - 1
    return float(vals[idx])


@dataclass
class SchemeSummary:
    scheme: str
    satisfaction_pct: float
    outage_pct: float
    sinr_p25_db: float
    sinr_p50_db: float
    sinr_p75_db: float
    mean_zone_count: float
    mean_swap_evaluations: float | None
    mean_swaps_accepted: float | None
    windows: int


def summarize(log: MetricsLog) -> list[SchemeSummary]:
    """Per-scheme satisfaction percentage, SINR percentiles, and game statistics."""
    out = []
    for slog in log.scheme_logs():
        if slog.sinr_db.size == 0:
            raise ValueError("empty metrics log")
        sat_pct = 100.0 * float(np.mean(slog.satisfied))
        samples = slog.sinr_db.ravel()
        if slog.zone_records:
            evals = float(np.mean([z.evaluations for z in slog.zone_records]))
            accepted = float(np.mean([z.accepted for z in slog.zone_records]))
        else:
            evals = accepted = None
        zone_counts = [w.zone_count for w in slog.windows]
        out.append(SchemeSummary(
            slog.scheme, sat_pct, 100.0 - sat_pct,
            percentile_nearest_rank(samples, 25),
            percentile_nearest_rank(samples, 50),
            percentile_nearest_rank(samples, 75),
            float(np.mean(zone_counts)) if zone_counts else 0.0,
            evals, accepted, log.formation_events))
    return out
