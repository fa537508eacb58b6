"""``fnls-lab run <config.json> [--out DIR] [--seed N] [--quiet] [--jobs N]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .reporting import write_json
from .scenarios import (
    EXIT_BLOWUP,
    EXIT_CONFIG,
    EXIT_DIAGNOSTIC,
    EXIT_OK,
    ConfigError,
    ScenarioResult,
    expand_sweep,
    run_scenario,
)

# worst first: a broken config outranks a failed check, which outranks a blow-up abort
_SEVERITY = (EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_BLOWUP, EXIT_OK)


def combine_exit_codes(codes) -> int:
    codes = list(codes)
    for code in _SEVERITY:
        if code in codes:
            return code
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fnls-lab", description="Fractional NLS numerical lab.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario config (or a sweep)")
    run.add_argument("config", help="path to a JSON scenario file")
    run.add_argument("--out", default=None, help="output directory (default: ./out/<name>)")
    run.add_argument("--seed", type=int, default=0, help="seed for random initial data")
    run.add_argument("--quiet", action="store_true", help="suppress the per-record summary")
    run.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep configs")
    return parser


def _run_one(args: tuple) -> ScenarioResult:
    cfg, out_dir, seed, base_dir = args
    return run_scenario(cfg, out_dir, seed=seed, base_dir=base_dir)


def _print_result(res: ScenarioResult, out_dir: str) -> None:
    print(f"[{res.name}] kind={res.kind} status={res.status} exit={res.exit_code} out={out_dir}")
    if res.message:
        print(f"  {res.message}")
    for rec in res.records:
        flag = "PASS" if rec.passed else "FAIL"
        print(f"  {flag} {rec.name}: value={rec.value} tol={rec.tolerance} ({rec.anchor})")


def cmd_run(ns: argparse.Namespace) -> int:
    try:
        with open(ns.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"fnls-lab: cannot read config {ns.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(cfg, dict):
        print("fnls-lab: config must be a JSON object", file=sys.stderr)
        return EXIT_CONFIG
    if ns.seed < 0 or ns.jobs < 1:
        print("fnls-lab: --seed must be >= 0 and --jobs >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        runs = expand_sweep(cfg)
    except ConfigError as exc:
        print(f"fnls-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    base_dir = os.path.dirname(os.path.abspath(ns.config))
    root = ns.out or os.path.join("out", str(cfg.get("name", cfg.get("kind", "run"))))
    if len(runs) == 1:
        dirs = [root]
    else:
        dirs = [os.path.join(root, str(r.get("name", f"run_{i:03d}"))) for i, r in enumerate(runs)]
    jobs = [(r, d, ns.seed, base_dir) for r, d in zip(runs, dirs)]

    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    for res, d in zip(results, dirs):
        if not ns.quiet:
            _print_result(res, d)
        elif res.exit_code == EXIT_CONFIG:
            print(f"fnls-lab: [{res.name}] {res.message}", file=sys.stderr)
    if len(results) > 1:
        os.makedirs(root, exist_ok=True)
        write_json(
            [{"name": r.name, "kind": r.kind, "exit_code": r.exit_code, "status": r.status, "out": d} for r, d in zip(results, dirs)],
            os.path.join(root, "sweep.json"),
        )
    return combine_exit_codes(r.exit_code for r in results)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if ns.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if ns.command == "run":
        return cmd_run(ns)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
