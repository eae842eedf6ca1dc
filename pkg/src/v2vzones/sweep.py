"""Experiment grids over (pair count, RB count, seed) and plot-ready file emission."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .engine import Simulation, summarize

SUMMARY_SCHEMA = "# v2vzones summary v1"
CDF_SCHEMA = "# v2vzones sinr_cdf v1"
ITERS_SCHEMA = "# v2vzones swap_iters v1"

SUMMARY_COLUMNS = ["scheme", "vue_pairs", "rbs", "seed", "satisfaction_pct",
                   "outage_pct", "sinr_p25_db", "sinr_p50_db", "sinr_p75_db",
                   "mean_zone_count", "mean_swap_evaluations",
                   "mean_swaps_accepted", "windows"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest round-trip representation
    return str(value)


def _csv_text(schema: str, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(schema + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


@dataclass
class SweepResult:
    rows: list[dict]
    files: dict[str, str] = field(default_factory=dict)


def run_sweep(base: SimConfig, vue_pairs: list[int], rbs: list[int],
              seeds: list[int], dump_matrices: bool = False) -> SweepResult:
    """One run per (K, N, seed); returns summary rows and deterministic file bodies.

    Emits summary.csv (one row per run per scheme), a JSON mirror, sinr_cdf.csv
    (sorted dB samples pooled over seeds per scheme/K/N) and swap_iters.csv
    (per zone per scheduling instant). Invalid combinations abort upfront.
    """
    if not vue_pairs or not rbs or not seeds:
        raise ValueError("vue_pairs, rbs and seeds must be non-empty")
    combos = []
    for k in vue_pairs:
        for n in rbs:
            for seed in seeds:
                cfg = base.model_copy(update={"vue_pairs": k, "rbs": n, "seed": seed})
                cfg = SimConfig(**cfg.model_dump())  # re-validate the combination
                combos.append(cfg)

    rows: list[dict] = []
    cdf_samples: dict[tuple[str, int, int], list[np.ndarray]] = {}
    iter_rows: list[list] = []
    files: dict[str, str] = {}

    for cfg in combos:
        log = Simulation(cfg).run(collect_matrices=dump_matrices)
        for summary in summarize(log):
            rows.append({
                "scheme": summary.scheme, "vue_pairs": cfg.vue_pairs,
                "rbs": cfg.rbs, "seed": cfg.seed,
                "satisfaction_pct": summary.satisfaction_pct,
                "outage_pct": summary.outage_pct,
                "sinr_p25_db": summary.sinr_p25_db,
                "sinr_p50_db": summary.sinr_p50_db,
                "sinr_p75_db": summary.sinr_p75_db,
                "mean_zone_count": summary.mean_zone_count,
                "mean_swap_evaluations": summary.mean_swap_evaluations,
                "mean_swaps_accepted": summary.mean_swaps_accepted,
                "windows": summary.windows,
            })
        for slog in log.scheme_logs():
            key = (slog.scheme, cfg.vue_pairs, cfg.rbs)
            cdf_samples.setdefault(key, []).append(slog.sinr_db.ravel())
            for zr in slog.zone_records:
                iter_rows.append([cfg.vue_pairs, cfg.rbs, cfg.seed, zr.window,
                                  zr.zone, len(zr.members), len(zr.rb_pool),
                                  zr.evaluations, zr.accepted, int(zr.converged),
                                  zr.utility, zr.satisfied])
            if dump_matrices:
                for window, mats in slog.matrix_dumps:
                    stem = f"matrices/K{cfg.vue_pairs}_N{cfg.rbs}_seed{cfg.seed}_w{window}"
                    for name, mat in mats.items():
                        files[f"{stem}_{name}.csv"] = _matrix_csv(mat)

    files["summary.csv"] = _csv_text(
        SUMMARY_SCHEMA, SUMMARY_COLUMNS,
        [[row[c] for c in SUMMARY_COLUMNS] for row in rows])
    files["summary.json"] = json.dumps(rows, indent=2) + "\n"

    cdf_rows = []
    for (scheme, k, n), chunks in sorted(cdf_samples.items()):
        for sample in np.sort(np.concatenate(chunks)):
            cdf_rows.append([scheme, k, n, float(sample)])
    files["sinr_cdf.csv"] = _csv_text(
        CDF_SCHEMA, ["scheme", "vue_pairs", "rbs", "sinr_db"], cdf_rows)

    files["swap_iters.csv"] = _csv_text(
        ITERS_SCHEMA,
        ["vue_pairs", "rbs", "seed", "window", "zone", "zone_pairs", "zone_rbs",
         "iterations", "accepted", "converged", "zone_utility", "satisfied"],
        iter_rows)

    return SweepResult(rows, files)


def _matrix_csv(mat: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    arr = np.atleast_2d(np.asarray(mat, dtype=float))
    for row in arr:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_files(files: dict[str, str], out_dir) -> list[str]:
    """Write the sweep's file bodies under out_dir, creating subdirectories."""
    from pathlib import Path

    out = Path(out_dir)
    written = []
    for name, body in files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body, encoding="utf-8")
        written.append(str(path))
    return written
