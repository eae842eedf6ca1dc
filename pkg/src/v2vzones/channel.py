"""Link math: street-canyon path loss, Rayleigh fading, SINR, rate, time load."""
from __future__ import annotations

import math

import numpy as np

from .scenario import GridLayout, segments_blocked

MIN_PATH_M = 1.0

DEFAULT_REF_DB = 43.0        # loss at the reference distance, 800 MHz street canyon
DEFAULT_REF_DIST_M = 100.0
DEFAULT_CORNER_DB = 15.0     # extra loss per 90-degree street corner


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(x)
    return out if out.ndim else float(out)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def pathloss_db(distance_m, corners: int = 0, ref_db: float = DEFAULT_REF_DB,
                ref_dist_m: float = DEFAULT_REF_DIST_M,
                corner_db: float = DEFAULT_CORNER_DB):
    """Loss in dB: 20 dB/decade around ref_db at ref_dist_m plus a per-corner penalty."""
    d = np.maximum(np.asarray(distance_m, dtype=float), MIN_PATH_M)
    out = ref_db + 20.0 * np.log10(d / ref_dist_m) + corner_db * corners
    return out if out.ndim else float(out)


def pathloss(tx, rx, los: bool, grid: GridLayout | None = None,
             ref_db: float = DEFAULT_REF_DB, ref_dist_m: float = DEFAULT_REF_DIST_M,
             corner_db: float = DEFAULT_CORNER_DB) -> float:
    """Linear power gain between two points; NLOS routes around street corners."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    if los:
        db = pathloss_db(np.hypot(*(rx - tx)), 0, ref_db, ref_dist_m, corner_db)
    else:
        if grid is None:
            raise ValueError("NLOS path loss needs the grid for corner routing")
        length, corners = manhattan_route(tx, rx, grid, corner_db)
        db = pathloss_db(length, corners, ref_db, ref_dist_m, corner_db)
    return db_to_linear(-db)


def manhattan_route(a, b, grid: GridLayout,
                    corner_db: float = DEFAULT_CORNER_DB) -> tuple[float, int]:
    """Shortest street route (length, corner count) between two blocked points.

    Searches 1- and 2-corner routes through intersection centers and keeps the
    one with the lowest resulting loss; falls back to the L1 distance with two
    corners if no routed path exists.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    wp = grid.waypoints
    va = ~segments_blocked(np.broadcast_to(a, wp.shape).copy(), wp, grid.buildings)
    vb = ~segments_blocked(np.broadcast_to(b, wp.shape).copy(), wp, grid.buildings)
    da = np.where(va, np.hypot(wp[:, 0] - a[0], wp[:, 1] - a[1]), np.inf)
    db_ = np.where(vb, np.hypot(wp[:, 0] - b[0], wp[:, 1] - b[1]), np.inf)
    l1 = float(np.min(da + db_))
    l2 = float(np.min(da[:, None] + grid.waypoint_route + db_[None, :]))
    manh = float(abs(b[0] - a[0]) + abs(b[1] - a[1]))
    best = None
    best_loss = math.inf
    for length, corners in ((l1, 1), (l2, 2)):
        if math.isfinite(length):
            loss = 20.0 * math.log10(max(length, MIN_PATH_M)) + corner_db * corners
            if loss < best_loss:
                best, best_loss = (length, corners), loss
    if best is None:
        return max(manh, MIN_PATH_M), 2
    return best


def pathloss_gain_matrix(tx_xy: np.ndarray, rx_xy: np.ndarray, grid: GridLayout,
                         ref_db: float = DEFAULT_REF_DB,
                         ref_dist_m: float = DEFAULT_REF_DIST_M,
                         corner_db: float = DEFAULT_CORNER_DB) -> np.ndarray:
    """(K, K) linear gains; entry [i, j] is tx of pair j -> rx of pair i."""
    tx_xy = np.asarray(tx_xy, dtype=float)
    rx_xy = np.asarray(rx_xy, dtype=float)
    k = tx_xy.shape[0]
    rx_rep = np.repeat(rx_xy, k, axis=0)
    tx_rep = np.tile(tx_xy, (k, 1))
    blocked = segments_blocked(tx_rep, rx_rep, grid.buildings).reshape(k, k)
    d_eu = np.hypot(rx_xy[:, None, 0] - tx_xy[None, :, 0],
                    rx_xy[:, None, 1] - tx_xy[None, :, 1])
    los_db = ref_db + 20.0 * np.log10(np.maximum(d_eu, MIN_PATH_M) / ref_dist_m)

    if blocked.any():
        wp = grid.waypoints
        w = len(wp)
        vis_r = ~segments_blocked(np.repeat(rx_xy, w, axis=0),
                                  np.tile(wp, (k, 1)), grid.buildings).reshape(k, w)
        vis_t = ~segments_blocked(np.repeat(tx_xy, w, axis=0),
                                  np.tile(wp, (k, 1)), grid.buildings).reshape(k, w)
        d_rw = np.where(vis_r, np.hypot(rx_xy[:, None, 0] - wp[None, :, 0],
                                        rx_xy[:, None, 1] - wp[None, :, 1]), np.inf)
        d_tw = np.where(vis_t, np.hypot(tx_xy[:, None, 0] - wp[None, :, 0],
                                        tx_xy[:, None, 1] - wp[None, :, 1]), np.inf)
        l1 = np.min(d_rw[:, None, :] + d_tw[None, :, :], axis=2)
        via = np.min(d_rw[:, :, None] + grid.waypoint_route[None, :, :], axis=1)
        l2 = np.min(via[:, None, :] + d_tw[None, :, :], axis=2)
        with np.errstate(invalid="ignore"):
            db1 = ref_db + 20.0 * np.log10(np.maximum(l1, MIN_PATH_M) / ref_dist_m) + corner_db
            db2 = ref_db + 20.0 * np.log10(np.maximum(l2, MIN_PATH_M) / ref_dist_m) + 2 * corner_db
        nlos_db = np.minimum(db1, db2)
        manh = np.abs(rx_xy[:, None, 0] - tx_xy[None, :, 0]) + \
            np.abs(rx_xy[:, None, 1] - tx_xy[None, :, 1])
        fallback = ref_db + 20.0 * np.log10(np.maximum(manh, MIN_PATH_M) / ref_dist_m) \
            + 2 * corner_db
        nlos_db = np.where(np.isfinite(nlos_db), nlos_db, fallback)
        loss_db = np.where(blocked, nlos_db, los_db)
    else:
        loss_db = los_db
    return 10.0 ** (-loss_db / 10.0)


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power gain (Rayleigh amplitude), i.i.d. per draw."""
    return rng.exponential(1.0, size)


def sinr(signal_gain: float, cochannel_gains, tx_power_w: float,
         noise_density_w_hz: float, bandwidth_hz: float,
         cochannel_powers_w=None) -> float:
    """gamma = P*h / (sum of co-channel received powers + N0*bandwidth)."""
    gains = np.asarray(list(cochannel_gains), dtype=float)
    if cochannel_powers_w is None:
        powers = np.full(gains.shape, tx_power_w)
    else:
        powers = np.asarray(list(cochannel_powers_w), dtype=float)
    interference = float(np.sum(powers * gains))
    noise = noise_density_w_hz * bandwidth_hz
    return tx_power_w * signal_gain / (interference + noise)


def rate(bandwidth_hz: float, sinr_linear: float) -> float:
    """Achievable rate in bit/s."""
    if sinr_linear < 0:
        raise ValueError("SINR must be non-negative")
    return bandwidth_hz * math.log2(1.0 + sinr_linear)


def traffic_influx(arrival_rate_pps: float, packet_bits: float) -> float:
    """Offered traffic in bit/s: packet rate times mean packet size."""
    return arrival_rate_pps * packet_bits


def time_load(influx_bps: float, rate_bps: float) -> float:
    """Fraction of a slot needed to carry the influx; +inf when the rate is zero."""
    if rate_bps <= 0.0:
        return math.inf
    return influx_bps / rate_bps


def slot_load(rb_loads, cap: float = 1.0) -> float:
    """Per-slot load: mean over all RBs of the per-RB loads, clamped at cap."""
    arr = np.asarray(rb_loads, dtype=float)
    if arr.size == 0:
        raise ValueError("slot_load needs at least one RB load")
    return float(np.mean(np.minimum(arr, cap)))


def expected_time_load(history, cap: float = 1.0) -> tuple[float, np.ndarray]:
    """Window-average load: clamp each slot at cap, then average.

    Returns (mean, clamped per-slot series). Empty windows are rejected.
    """
    arr = np.asarray(history, dtype=float)
    if arr.size == 0:
        raise ValueError("expected_time_load needs a non-empty window")
    clamped = np.minimum(arr, cap)
    return float(np.mean(clamped)), clamped
