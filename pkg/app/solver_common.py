"""
Pieces shared by every solver: the all-local fallback, result assembly and
convergence-trace export.
"""

import logging
import os
import time
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from app.errors import InvalidArgumentError
from app.models import (
    Decision,
    DropPenalty,
    Mode,
    ProcessingModel,
    RadioConfig,
    ServerSpec,
    SolverName,
    SolveResult,
    Task,
    TracePoint,
)
from app.objective import assess
from app.radio import rb_max

logger = logging.getLogger(__name__)


def local_only_decision(tasks: Sequence[Task], radio: RadioConfig) -> Decision:
    """Everything local; feasible in LocalOnly and Partition modes"""
    return Decision.uniform(tasks, local_fraction=1.0, rb_count=rb_max(radio))


def build_result(
    solver: SolverName,
    mode: Mode,
    tasks: Sequence[Task],
    decision: Decision,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]],
    drop_penalty: Optional[DropPenalty],
    trace: List[Tuple[int, float]],
    evaluations: int,
    started: float,
    optimal: Optional[bool] = None,
    lower_bound: Optional[float] = None,
) -> SolveResult:
    """Re-evaluate the chosen decision with the full simulator and package it"""
    assessment = assess(tasks, decision, mode, model, radio, servers, drop_penalty)
    if not assessment.value.feasible:
        tags = sorted({violation.constraint.value for violation in assessment.violations})
        raise InvalidArgumentError(
            f"{solver.value} produced an infeasible {mode.value} decision ({tags})"
        )
    result = SolveResult(
        solver=solver,
        mode=mode,
        best_decision=decision,
        best_value=assessment.value,
        trace=[TracePoint(iteration=i, best_objective=v) for i, v in trace],
        evaluations=evaluations,
        wall_time_s=time.perf_counter() - started,
        optimal=optimal,
        lower_bound=lower_bound,
    )
    logger.info(
        f"{solver.value} solved {len(tasks)} tasks in {mode.value} mode: "
        f"objective {result.best_value.total:.6f} after {evaluations} evaluations "
        f"({result.wall_time_s:.2f}s)"
    )
    return result


def export_trace_csv(trace: Sequence[TracePoint], path: str) -> str:
    """Convergence trace as iteration,best_objective rows, renamed into place when complete"""
    frame = pd.DataFrame(
        [(point.iteration, point.best_objective) for point in trace],
        columns=["iteration", "best_objective"],
    )
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    partial = f"{path}.partial"
    frame.to_csv(partial, index=False)
    os.replace(partial, path)
    return path
