"""
Exhaustive enumeration over the grid decision space, for checking the
branch-and-bound solver on small instances.

The enumeration lists every server (none included) and every RB choice for
every grid fraction, and sums its own per-task terms, so neither the solver's
option reduction nor its evaluator is taken on trust.
"""

import json
import logging
import math
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from app.errors import InvalidArgumentError
from app.models import (
    Decision,
    DropPenalty,
    ExactConfig,
    Mode,
    ProcessingModel,
    RadioConfig,
    ServerSpec,
    Task,
    TaskDecision,
    default_drop_penalty,
    default_servers,
)
from app.objective import assess
from app.scheduler import Placement, ScheduleKernel

logger = logging.getLogger(__name__)

# Leaves beyond this are refused rather than enumerated
MAX_LEAVES = 2_000_000


class OracleInstance(BaseModel):
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "tasks": [
                    {"id": 0, "ue_id": 0, "size_bits": 2e6, "arrival_s": 0.0, "deadline_s": 1.0}
                ],
                "mode": "partition",
                "p_grid_step": 0.25,
                "rb_choices": [50, 100],
            }
        },
    )

    tasks: List[Task]
    mode: Mode
    servers: List[ServerSpec] = Field(default_factory=default_servers)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    processing: ProcessingModel = Field(default_factory=ProcessingModel)
    p_grid_step: float = 0.25
    rb_choices: List[PositiveInt] = Field(default_factory=lambda: [50, 100])
    drop_penalty: DropPenalty = Field(default_factory=default_drop_penalty)

    def exact_config(self, node_limit: Optional[int] = None) -> ExactConfig:
        return ExactConfig(
            p_grid_step=self.p_grid_step, rb_choices=self.rb_choices, node_limit=node_limit
        )


class OracleResult(BaseModel):
    objective: float
    leaves: int
    decision: Optional[Decision] = None


def full_options(
    mode: Mode, p_grid_step: float, server_count: int, rb_choices: List[int]
) -> List[Tuple[float, Optional[int], int]]:
    """Every (p, server index or None, rb count) a task can take, duplicates included"""
    points = int(round(1.0 / p_grid_step))
    fractions = [k / points for k in range(points + 1)]
    servers: List[Optional[int]] = [None] + list(range(server_count))
    return [
        (p, j, rb)
        for p in fractions
        if mode.allows(p)
        for j in servers
        for rb in rb_choices
    ]


def leaf_term(placement: Placement, drop_penalty: DropPenalty) -> float:
    """The objective term of one placed task, written out from its definition"""
    p = placement.local_fraction
    term = placement.local_proc + p * placement.local_waiting
    if placement.scheduled:
        term += placement.proc + placement.comm + (1.0 - p) * placement.waiting
    if placement.dropped:
        term += (1.0 - p) if drop_penalty is DropPenalty.PER_TASK else 1.0
    return term


def enumerate_optimum(instance: OracleInstance) -> OracleResult:
    """
    Walk every combination of per-task options depth first and keep the first
    minimum. In Partition mode a combination is skipped as soon as one of its
    portions is dropped. The winner is re-scored with the full simulator.
    Returns an infinite objective only if no combination is feasible.
    """
    drop_penalty = DropPenalty(instance.drop_penalty)
    kernel = ScheduleKernel(instance.tasks, instance.processing, instance.radio, instance.servers)
    options = full_options(
        instance.mode, instance.p_grid_step, len(kernel.servers), sorted(set(instance.rb_choices))
    )
    n = len(kernel)
    leaves = len(options) ** n
    if leaves > MAX_LEAVES:
        raise InvalidArgumentError(
            f"{leaves} combinations exceed the enumeration cap of {MAX_LEAVES}"
        )

    state = kernel.new_state()
    chosen: List[int] = [0] * n
    best_value = math.inf
    best_ranks: Optional[List[int]] = None

    def descend(k: int, acc: float) -> None:
        nonlocal best_value, best_ranks
        if k == n:
            if acc < best_value:
                best_value = acc
                best_ranks = list(chosen)
            return
        for rank, (p, j, rb) in enumerate(options):
            placement = kernel.place(state, k, p, j, rb)
            if placement.dropped and instance.mode is Mode.PARTITION:
                continue
            chosen[k] = rank
            token = kernel.commit(state, placement)
            descend(k + 1, acc + leaf_term(placement, drop_penalty))
            kernel.undo(state, token)

    descend(0, 0.0)
    if best_ranks is None:
        logger.info(f"Enumerated {leaves} decisions for {n} tasks: none feasible")
        return OracleResult(objective=math.inf, leaves=leaves)

    decision = Decision(
        items=tuple(
            TaskDecision(
                task_id=task.id,
                local_fraction=options[rank][0],
                server=None if options[rank][1] is None else kernel.servers[options[rank][1]].id,
                rb_count=options[rank][2],
            )
            for task, rank in zip(kernel.tasks, best_ranks)
        )
    )
    value = assess(
        instance.tasks,
        decision,
        instance.mode,
        instance.processing,
        instance.radio,
        instance.servers,
        drop_penalty,
    ).value
    if abs(value.total - best_value) > 1e-9 * max(1.0, abs(best_value)):
        logger.warning(
            f"Simulator scores the enumerated optimum at {value.total:.9f}, "
            f"the walk at {best_value:.9f}"
        )
    logger.info(f"Enumerated {leaves} decisions for {n} tasks: optimum {value.total:.9f}")
    return OracleResult(objective=value.total, leaves=leaves, decision=decision)


def load_instance(path: str) -> OracleInstance:
    with open(path, "r", encoding="utf-8") as handle:
        return OracleInstance.model_validate(json.load(handle))
