"""
Report persistence: summary and raw-row CSVs, one convergence trace per run,
and the manifest that replays the whole experiment.

Every file is written to "<name>.partial" first and renamed into place, so an
interrupted write never leaves a truncated final file.
"""

import logging
import os
from typing import List, Optional

import pandas as pd

from app.audit_logger import AuditLogger
from app.errors import InvalidConfigError
from app.experiment import SUMMARY_COLUMNS, plan_seeds, run_experiment
from app.models import ExperimentManifest, ExperimentReport, RunRow, TraceRecord
from app.solver_common import export_trace_csv

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.csv"
RUNS_FILE = "runs.csv"
MANIFEST_FILE = "manifest.json"
TRACE_DIR = "traces"

RUN_COLUMNS = list(RunRow.model_fields)


def _write_frame(frame: pd.DataFrame, path: str) -> str:
    partial = f"{path}.partial"
    frame.to_csv(partial, index=False)
    os.replace(partial, path)
    return path


def _write_text(text: str, path: str) -> str:
    partial = f"{path}.partial"
    with open(partial, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(partial, path)
    return path


def trace_filename(trace: TraceRecord) -> str:
    return f"{trace.ue_count}_{trace.mode.value}_{trace.solver.value}_run{trace.run}.csv"


def write_report(report: ExperimentReport, output_dir: str) -> List[str]:
    """Write the report files and return their paths"""
    os.makedirs(os.path.join(output_dir, TRACE_DIR), exist_ok=True)
    written = []

    summary = pd.DataFrame(
        [row.model_dump(mode="json") for row in report.aggregates], columns=SUMMARY_COLUMNS
    )
    written.append(_write_frame(summary, os.path.join(output_dir, SUMMARY_FILE)))

    runs = pd.DataFrame([row.model_dump(mode="json") for row in report.rows], columns=RUN_COLUMNS)
    written.append(_write_frame(runs, os.path.join(output_dir, RUNS_FILE)))

    for trace in report.traces:
        path = os.path.join(output_dir, TRACE_DIR, trace_filename(trace))
        written.append(export_trace_csv(trace.points, path))

    manifest = ExperimentManifest(config=report.config, seeds=report.seeds)
    written.append(
        _write_text(manifest.model_dump_json(indent=2), os.path.join(output_dir, MANIFEST_FILE))
    )

    logger.info(f"Wrote {len(written)} report files to {output_dir}")
    AuditLogger.log_report_written(output_dir, len(written))
    return written


def load_manifest(path: str) -> ExperimentManifest:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        return ExperimentManifest.model_validate_json(text)
    except ValueError as e:
        raise InvalidConfigError(f"{path}: invalid manifest: {e}")


def replay(
    manifest: ExperimentManifest,
    output_dir: Optional[str] = None,
    max_workers: Optional[int] = None,
) -> ExperimentReport:
    """Re-run an experiment with its recorded seeds and write the same files"""
    cfg = manifest.config
    if output_dir is not None:
        cfg = cfg.model_copy(update={"output_dir": output_dir})

    expected = {(seed.ue_count, seed.run) for seed in plan_seeds(cfg)}
    recorded = {(seed.ue_count, seed.run) for seed in manifest.seeds}
    if recorded != expected:
        raise InvalidConfigError(
            f"manifest seeds cover {len(recorded)} grid points, the config needs {len(expected)}"
        )

    report = run_experiment(cfg, max_workers=max_workers, seeds=manifest.seeds)
    write_report(report, cfg.output_dir)
    return report
