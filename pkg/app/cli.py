"""
Command-line entry point.

    mec-offload run configs/default.env --ue-counts 50,100 --runs 2
    mec-offload replay results/manifest.json --out results-replay
    mec-offload oracle instance.json
    mec-offload workload configs/default.env --ue-count 50 --run 0 --out tasks.jsonl

Exit status is 0 on success, 2 for config or argument errors and 1 for I/O
errors; failures print one "error: {json}" line on stderr.
"""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from app.audit_logger import AuditLogger
from app.config import settings
from app.errors import ConfigParseError
from app.experiment import run_experiment, seed_for
from app.experiment_config import load_experiment_config
from app.exact_solver import solve_exact
from app.oracle import enumerate_optimum, load_instance
from app.report import load_manifest, replay, write_report
from app.workload import generate_workload, write_workload

logger = logging.getLogger(__name__)

CONFIG_ERROR_EXIT = 2
IO_ERROR_EXIT = 1


def _overrides(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    return {
        "seed": None if args.seed is None else str(args.seed),
        "output_dir": args.out,
        "solvers": args.solvers,
        "ue_counts": args.ue_counts,
        "runs_per_point": None if args.runs is None else str(args.runs),
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_experiment_config(args.config, overrides=_overrides(args))
    report = run_experiment(cfg, max_workers=args.workers)
    write_report(report, cfg.output_dir)
    print(f"{cfg.output_dir}/summary.csv")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    report = replay(manifest, output_dir=args.out, max_workers=args.workers)
    print(f"{report.config.output_dir}/summary.csv")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    result = enumerate_optimum(instance)
    output = result.model_dump(mode="json")
    if args.compare:
        exact = solve_exact(
            instance.tasks,
            instance.mode,
            instance.exact_config(),
            instance.processing,
            instance.radio,
            instance.servers,
            instance.drop_penalty,
        )
        output["exact_objective"] = exact.best_value.total
        output["match"] = abs(exact.best_value.total - result.objective) <= 1e-9
    print(json.dumps(output))
    return 0


def cmd_workload(args: argparse.Namespace) -> int:
    overrides = {"seed": None if args.seed is None else str(args.seed)}
    cfg = load_experiment_config(args.config, overrides=overrides)
    seed = seed_for(cfg, args.ue_count, args.run)
    tasks = generate_workload(cfg.workload.spec_for(args.ue_count, seed.workload_seed))
    write_workload(tasks, args.out)
    print(f"{len(tasks)} tasks -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mec-offload",
        description="Partitioned task offloading experiments for MEC",
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run an experiment sweep from a config file")
    run.add_argument("config", help="Experiment config file")
    run.add_argument("--seed", type=int, help="Base seed")
    run.add_argument("--out", help="Output directory")
    run.add_argument("--solvers", help="Comma-separated solvers (exact, cuckoo, baseline)")
    run.add_argument("--ue-counts", help="Comma-separated UE counts")
    run.add_argument("--runs", type=int, help="Runs per grid point")
    run.add_argument("--workers", type=int, help="Worker processes (1 runs in-process)")
    run.set_defaults(handler=cmd_run)

    rerun = subparsers.add_parser("replay", help="Re-run an experiment from its manifest")
    rerun.add_argument("manifest", help="manifest.json written by a previous run")
    rerun.add_argument("--out", help="Output directory")
    rerun.add_argument("--workers", type=int, help="Worker processes (1 runs in-process)")
    rerun.set_defaults(handler=cmd_replay)

    oracle = subparsers.add_parser("oracle", help="Enumerate every grid decision of a small instance")
    oracle.add_argument("instance", help="Instance JSON file")
    oracle.add_argument("--compare", action="store_true", help="Also run the exact solver")
    oracle.set_defaults(handler=cmd_oracle)

    workload = subparsers.add_parser("workload", help="Export the workload of one run")
    workload.add_argument("config", help="Experiment config file")
    workload.add_argument("--ue-count", type=int, required=True)
    workload.add_argument("--run", type=int, default=0)
    workload.add_argument("--seed", type=int, help="Base seed")
    workload.add_argument("--out", required=True, help="JSON-lines output file")
    workload.set_defaults(handler=cmd_workload)
    return parser


def _fail(command: str, payload: dict, code: int) -> int:
    AuditLogger.log_failure(command, payload["message"])
    print(f"error: {json.dumps(payload)}", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        return args.handler(args)
    except ConfigParseError as e:
        logger.error(f"Config error: {e}")
        return _fail(args.command, e.to_dict(), CONFIG_ERROR_EXIT)
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        payload = {"type": type(e).__name__, "message": str(e), "field": None, "line": None}
        return _fail(args.command, payload, CONFIG_ERROR_EXIT)
    except OSError as e:
        logger.error(f"I/O error: {e}")
        payload = {"type": type(e).__name__, "message": str(e), "field": None, "line": None}
        return _fail(args.command, payload, IO_ERROR_EXIT)


if __name__ == "__main__":
    sys.exit(main())
