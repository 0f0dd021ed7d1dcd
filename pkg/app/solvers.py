"""
Trivial baselines and a single entry point over every solver.
"""

import logging
import time
from typing import Optional, Sequence

from app.cuckoo_search import solve_cuckoo
from app.errors import InvalidArgumentError
from app.exact_solver import solve_exact
from app.models import (
    CuckooConfig,
    DropPenalty,
    ExactConfig,
    Mode,
    ProcessingModel,
    RadioConfig,
    ServerSpec,
    SolverName,
    SolveResult,
    Task,
)
from app.objective import ObjectiveEvaluator
from app.solver_common import build_result, local_only_decision

logger = logging.getLogger(__name__)


def solve_baseline(
    tasks: Sequence[Task],
    mode: Mode,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    drop_penalty: Optional[DropPenalty] = None,
) -> SolveResult:
    """
    LocalOnly (and Partition) get the all-local decision. OffloadOnly sends
    every task whole to the server where it can start earliest, with all RBs,
    and leaves it unassigned when no server meets its deadline.
    """
    started = time.perf_counter()
    mode = Mode(mode)
    evaluator = ObjectiveEvaluator(tasks, mode, model, radio, servers, drop_penalty)
    kernel = evaluator.kernel
    n = len(kernel)
    if mode is not Mode.OFFLOAD_ONLY:
        total = evaluator.cost([1.0] * n, [None] * n, [kernel.rb_max] * n)
        return build_result(
            SolverName.BASELINE,
            mode,
            tasks,
            local_only_decision(tasks, radio),
            model,
            radio,
            servers,
            evaluator.drop_penalty,
            [(0, total)],
            evaluator.evaluations,
            started,
        )

    state = kernel.new_state()
    rb = kernel.rb_max
    chosen = []
    total = 0.0
    for k in range(n):
        best = None
        for j in range(len(kernel.servers)):
            placement = kernel.place(state, k, 0.0, j, rb)
            if placement.dropped:
                continue
            if best is None or placement.start < best.start:
                best = placement
        if best is None:
            best = kernel.place(state, k, 0.0, None, rb)
        kernel.commit(state, best)
        chosen.append(best.server_index)
        total += evaluator.placement_cost(best)

    decision = evaluator.to_decision([0.0] * n, chosen, [rb] * n)
    return build_result(
        SolverName.BASELINE,
        mode,
        tasks,
        decision,
        model,
        radio,
        servers,
        evaluator.drop_penalty,
        [(0, total)],
        n * len(kernel.servers),
        started,
    )


def solve(
    tasks: Sequence[Task],
    mode: Mode,
    solver: SolverName,
    *,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    exact: Optional[ExactConfig] = None,
    cuckoo: Optional[CuckooConfig] = None,
    drop_penalty: Optional[DropPenalty] = None,
) -> SolveResult:
    solver = SolverName(solver)
    logger.debug(f"Dispatching {len(tasks)} tasks to the {solver.value} solver ({mode})")
    if solver is SolverName.EXACT:
        return solve_exact(
            tasks, mode, exact or ExactConfig(), model, radio, servers, drop_penalty
        )
    if solver is SolverName.CUCKOO:
        return solve_cuckoo(
            tasks, mode, cuckoo or CuckooConfig(), model, radio, servers, drop_penalty
        )
    if solver is SolverName.BASELINE:
        return solve_baseline(tasks, mode, model, radio, servers, drop_penalty)
    raise InvalidArgumentError(f"unknown solver {solver}")
