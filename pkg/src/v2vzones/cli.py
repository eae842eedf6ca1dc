"""Command-line client: runs sweeps in-process or against a running service."""
from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .sweep import run_sweep, write_files


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2vzones",
                                     description="Zone-based V2V resource allocation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a simulation sweep and write result files")
    run_p.add_argument("--config", help="flat key/value YAML config file")
    run_p.add_argument("--vue-pairs", type=_int_list, help="pair counts, e.g. 10 or 10,15,20")
    run_p.add_argument("--rbs", type=_int_list, help="RB counts, e.g. 15 or 6,15")
    run_p.add_argument("--seed", type=int, help="single seed (ignored when --seeds is given)")
    run_p.add_argument("--seeds", type=_int_list, help="comma-separated seed list")
    run_p.add_argument("--scheme", choices=["proposed", "baseline", "both"])
    run_p.add_argument("--out-dir", default="out", help="directory for result files")
    run_p.add_argument("--dump-matrices", action="store_true",
                       help="also write per-window similarity/affinity/eigenvalue CSVs")
    run_p.add_argument("--vacancy-moves", action="store_true",
                       help="let single pairs move to emptier RBs during the game")
    run_p.add_argument("--server", help="POST the sweep to a running service instead "
                                        "of executing locally")

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)

    sub.add_parser("defaults", help="print the default configuration as YAML")
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.scheme:
        overrides["scheme"] = args.scheme
    if args.vacancy_moves:
        overrides["vacancy_moves"] = True
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = parse_config(args.config, overrides)

    vue_pairs = args.vue_pairs or [cfg.vue_pairs]
    rbs = args.rbs or [cfg.rbs]
    seeds = args.seeds or [cfg.seed]

    if args.server:
        import httpx

        payload = {"config": cfg.model_dump(), "vue_pairs": vue_pairs, "rbs": rbs,
                   "seeds": seeds, "dump_matrices": args.dump_matrices}
        resp = httpx.post(args.server.rstrip("/") + "/sweep", json=payload,
                          timeout=None)
        resp.raise_for_status()
        body = resp.json()
        rows, files = body["rows"], body["files"]
    else:
        result = run_sweep(cfg, vue_pairs, rbs, seeds, args.dump_matrices)
        rows, files = result.rows, result.files

    written = write_files(files, args.out_dir)
    for row in rows:
        print(f"{row['scheme']:>8}  K={row['vue_pairs']:<3} N={row['rbs']:<3} "
              f"seed={row['seed']:<4} satisfied={row['satisfaction_pct']:6.2f}%  "
              f"p50={row['sinr_p50_db']:8.2f} dB")
    print(f"wrote {len(written)} files to {args.out_dir}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("v2vzones.service:app", host=args.host, port=args.port)
    return 0


def _cmd_defaults() -> int:
    import yaml

    from .config import SimConfig

    print(yaml.safe_dump(SimConfig().model_dump(), sort_keys=True), end="")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "serve":
        return _cmd_serve(args)
    return _cmd_defaults()


if __name__ == "__main__":
    sys.exit(main())
