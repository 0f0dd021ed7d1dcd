"""
Seeded sweeps over UE counts x modes x solvers x runs.

Every grid job regenerates its own workload from its recorded seed, so jobs
are independent and can run in any process; results are collected in job
order and aggregated once.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from app.audit_logger import AuditLogger
from app.config import settings
from app.models import (
    AggregateRow,
    ExperimentConfig,
    ExperimentReport,
    Mode,
    RunRow,
    RunSeed,
    SolverName,
    TraceRecord,
)
from app.objective import assess
from app.scheduler import drop_count, utilization
from app.solvers import solve
from app.workload import generate_workload

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "ue_count",
    "mode",
    "solver",
    "mean_latency_s",
    "std_latency_s",
    "mean_drops",
    "mec_util",
    "local_util",
    "mean_walltime_s",
]


@dataclass(frozen=True)
class GridJob:
    config: ExperimentConfig
    ue_count: int
    mode: Mode
    solver: SolverName
    seed: RunSeed

    @property
    def run(self) -> int:
        return self.seed.run


def seed_for(cfg: ExperimentConfig, ue_count: int, run: int) -> RunSeed:
    """Workload and cuckoo seeds are the base seeds XOR the run index"""
    return RunSeed(
        ue_count=ue_count,
        run=run,
        workload_seed=cfg.seed ^ run,
        cuckoo_seed=cfg.cuckoo.seed ^ run,
    )


def plan_seeds(cfg: ExperimentConfig) -> List[RunSeed]:
    return [
        seed_for(cfg, ue_count, run)
        for ue_count in cfg.ue_counts
        for run in range(cfg.runs_per_point)
    ]


def plan_jobs(cfg: ExperimentConfig, seeds: Optional[Sequence[RunSeed]] = None) -> List[GridJob]:
    seeds = list(seeds) if seeds is not None else plan_seeds(cfg)
    by_point = {(seed.ue_count, seed.run): seed for seed in seeds}
    jobs = []
    for ue_count in cfg.ue_counts:
        for mode in cfg.modes:
            for solver in cfg.solvers:
                for run in range(cfg.runs_per_point):
                    jobs.append(
                        GridJob(
                            config=cfg,
                            ue_count=ue_count,
                            mode=mode,
                            solver=solver,
                            seed=by_point[(ue_count, run)],
                        )
                    )
    return jobs


def run_job(job: GridJob) -> Tuple[RunRow, TraceRecord]:
    """Generate, solve and measure one run; a module-level function so it pickles"""
    cfg = job.config
    spec = cfg.workload.spec_for(job.ue_count, job.seed.workload_seed)
    tasks = generate_workload(spec)

    result = solve(
        tasks,
        job.mode,
        job.solver,
        model=cfg.processing,
        radio=cfg.radio,
        servers=cfg.servers,
        exact=cfg.exact,
        cuckoo=cfg.cuckoo.model_copy(update={"seed": job.seed.cuckoo_seed}),
        drop_penalty=cfg.drop_penalty,
    )
    assessment = assess(
        tasks,
        result.best_decision,
        job.mode,
        cfg.processing,
        cfg.radio,
        cfg.servers,
        cfg.drop_penalty,
    )
    outcome = assessment.outcome
    drops = drop_count(outcome)
    horizon = max(spec.horizon_s, outcome.last_completion_s)
    mec_util, local_util = utilization(outcome, horizon)
    served = max(1, len(tasks) - drops)
    makespans = [item.completion_s - item.arrival_s for item in outcome.tasks]

    row = RunRow(
        ue_count=job.ue_count,
        mode=job.mode,
        solver=job.solver,
        run=job.run,
        workload_seed=job.seed.workload_seed,
        task_count=len(tasks),
        objective=assessment.value.total,
        latency_component=assessment.value.latency_component,
        drop_component=assessment.value.drop_component,
        feasible=assessment.value.feasible,
        mean_latency_s=assessment.value.latency_component / served,
        drops=drops,
        mec_util=mec_util,
        local_util=local_util,
        mean_makespan_s=sum(makespans) / len(makespans) if makespans else 0.0,
        evaluations=result.evaluations,
        wall_time_s=result.wall_time_s if cfg.record_wall_time else 0.0,
    )
    trace = TraceRecord(
        ue_count=job.ue_count,
        mode=job.mode,
        solver=job.solver,
        run=job.run,
        points=result.trace,
    )
    return row, trace


def aggregate(rows: Sequence[RunRow]) -> List[AggregateRow]:
    """Per (ue_count, mode, solver) means in first-seen order; std uses ddof=0"""
    if not rows:
        return []
    frame = pd.DataFrame([row.model_dump(mode="json") for row in rows])
    grouped = frame.groupby(["ue_count", "mode", "solver"], sort=False)
    summary = grouped.agg(
        mean_latency_s=("mean_latency_s", "mean"),
        std_latency_s=("mean_latency_s", lambda values: values.std(ddof=0)),
        mean_drops=("drops", "mean"),
        mec_util=("mec_util", "mean"),
        local_util=("local_util", "mean"),
        mean_walltime_s=("wall_time_s", "mean"),
    ).reset_index()
    return [
        AggregateRow(
            ue_count=int(record["ue_count"]),
            mode=record["mode"],
            solver=record["solver"],
            mean_latency_s=float(record["mean_latency_s"]),
            std_latency_s=float(record["std_latency_s"]),
            mean_drops=float(record["mean_drops"]),
            mec_util=float(record["mec_util"]),
            local_util=float(record["local_util"]),
            mean_walltime_s=float(record["mean_walltime_s"]),
        )
        for record in summary.to_dict("records")
    ]


def run_experiment(
    cfg: ExperimentConfig,
    max_workers: Optional[int] = None,
    seeds: Optional[Sequence[RunSeed]] = None,
) -> ExperimentReport:
    """
    Run the full grid. Jobs go to a bounded process pool unless max_workers is
    1; results come back in job order either way, so the report does not
    depend on the worker count.
    """
    seeds = list(seeds) if seeds is not None else plan_seeds(cfg)
    jobs = plan_jobs(cfg, seeds)
    workers = max_workers or settings.MAX_WORKERS
    logger.info(
        f"Running {len(jobs)} jobs ({len(cfg.ue_counts)} UE counts x {len(cfg.modes)} "
        f"modes x {len(cfg.solvers)} solvers x {cfg.runs_per_point} runs) "
        f"on {workers} worker(s)"
    )
    AuditLogger.log_experiment_started(
        len(jobs), cfg.ue_counts, cfg.modes, cfg.solvers, cfg.seed
    )

    if workers <= 1 or len(jobs) <= 1:
        results = [run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_job, jobs))

    rows = [row for row, _ in results]
    traces = [trace for _, trace in results]
    for row in rows:
        AuditLogger.log_run_completed(
            row.ue_count, row.mode.value, row.solver.value, row.run, row.objective, row.drops
        )
        if not row.feasible:
            logger.error(
                f"Infeasible result for {row.ue_count} UEs, {row.mode.value}, "
                f"{row.solver.value}, run {row.run}"
            )

    return ExperimentReport(
        config=cfg,
        seeds=seeds,
        rows=rows,
        aggregates=aggregate(rows),
        traces=traces,
    )
