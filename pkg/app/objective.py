"""
Objective and constraint evaluation for the three processing modes.

A task with local fraction p costs

    p * (local_time + local_wait)
      + (1 - p) * ((mec_time + server_wait + roundtrip) * scheduled + unassigned)

where the times are those of the whole task. They are linear in the size, so
the p-weighted local, MEC and roundtrip times are exactly the portion times the
scheduler records; only the two waiting times get weighted here.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from app.errors import InvalidArgumentError
from app.models import (
    ConstraintTag,
    ConstraintViolation,
    Decision,
    DropPenalty,
    Mode,
    ObjectiveValue,
    ProcessingModel,
    RadioConfig,
    ScheduleOutcome,
    ServerSpec,
    Task,
    TaskDecision,
    TaskSchedule,
    default_drop_penalty,
)
from app.radio import rb_max
from app.scheduler import Placement, ScheduleKernel, simulate

logger = logging.getLogger(__name__)

# Slack for comparisons of recomputed schedule times
TIME_TOLERANCE = 1e-9


def term_components(
    local_fraction: float,
    local_s: float,
    local_waiting_s: float,
    comm_s: float,
    mec_compute_s: float,
    waiting_s: float,
    scheduled: bool,
    dropped: bool,
    drop_penalty: DropPenalty,
) -> Tuple[float, float]:
    """(latency, drop) contribution of one task"""
    latency = local_s + local_fraction * local_waiting_s
    if scheduled:
        latency += mec_compute_s + comm_s + (1.0 - local_fraction) * waiting_s
    drop = 0.0
    if dropped:
        drop = (1.0 - local_fraction) if drop_penalty is DropPenalty.PER_TASK else 1.0
    return latency, drop


def check_mode(decision: Decision, mode: Mode) -> None:
    for item in decision.items:
        if not mode.allows(item.local_fraction):
            raise InvalidArgumentError(
                f"task {item.task_id} has local fraction {item.local_fraction}, "
                f"not allowed in {mode.value} mode"
            )


def check_constraints(
    tasks: Sequence[Task],
    decision: Decision,
    outcome: ScheduleOutcome,
    mode: Mode,
    radio: RadioConfig,
) -> List[ConstraintViolation]:
    """One record per violated constraint; an empty list means feasible"""
    violations: List[ConstraintViolation] = []
    cap = rb_max(radio)

    for item in decision.items:
        if not mode.allows(item.local_fraction):
            violations.append(
                ConstraintViolation(
                    task_id=item.task_id,
                    constraint=ConstraintTag.FRACTION_REGIME,
                    detail=f"p={item.local_fraction} in {mode.value} mode",
                )
            )
        if item.rb_count > cap:
            violations.append(
                ConstraintViolation(
                    task_id=item.task_id,
                    constraint=ConstraintTag.RB_CAP,
                    detail=f"{item.rb_count} RBs granted, cap is {cap}",
                )
            )
        if item.server is not None and item.server not in outcome.mec_capacity:
            violations.append(
                ConstraintViolation(
                    task_id=item.task_id,
                    constraint=ConstraintTag.UNKNOWN_SERVER,
                    detail=f"server {item.server} does not exist",
                )
            )

    first_on_cpu = {}
    for schedule in outcome.tasks:
        if schedule.scheduled:
            violations.extend(_start_violations(schedule))
            key = (schedule.server, schedule.cpu)
            if key not in first_on_cpu:
                first_on_cpu[key] = schedule
        elif schedule.dropped and mode is Mode.PARTITION:
            violations.append(
                ConstraintViolation(
                    task_id=schedule.task_id,
                    constraint=ConstraintTag.ZERO_DROP,
                    detail="offloaded portion was dropped",
                )
            )

    for schedule in first_on_cpu.values():
        if abs(schedule.start_s - schedule.ready_s) > TIME_TOLERANCE:
            violations.append(
                ConstraintViolation(
                    task_id=schedule.task_id,
                    constraint=ConstraintTag.FIRST_START,
                    detail=(
                        f"first portion on server {schedule.server} starts at "
                        f"{schedule.start_s}, arrived at {schedule.ready_s}"
                    ),
                )
            )
    return violations


def _start_violations(schedule: TaskSchedule) -> List[ConstraintViolation]:
    found = []
    if schedule.start_s < schedule.ready_s - TIME_TOLERANCE:
        found.append(
            ConstraintViolation(
                task_id=schedule.task_id,
                constraint=ConstraintTag.START_BEFORE_ARRIVAL,
                detail=f"start {schedule.start_s} before arrival {schedule.ready_s}",
            )
        )
    latest = (
        schedule.deadline_s
        - schedule.breakdown.mec_compute_s
        - schedule.breakdown.comm_s
    )
    if schedule.start_s > latest + TIME_TOLERANCE:
        found.append(
            ConstraintViolation(
                task_id=schedule.task_id,
                constraint=ConstraintTag.START_WINDOW,
                detail=f"start {schedule.start_s} after latest feasible start {latest}",
            )
        )
    return found


@dataclass(frozen=True)
class Assessment:
    value: ObjectiveValue
    outcome: ScheduleOutcome
    violations: List[ConstraintViolation]


def assess(
    tasks: Sequence[Task],
    decision: Decision,
    mode: Mode,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    drop_penalty: Optional[DropPenalty] = None,
) -> Assessment:
    """Simulate, check constraints and compute the objective in one pass"""
    check_mode(decision, mode)
    drop_penalty = DropPenalty(drop_penalty or default_drop_penalty())
    outcome = simulate(tasks, decision, model, radio, servers)
    violations = check_constraints(tasks, decision, outcome, mode, radio)

    latency_total = 0.0
    drop_total = 0.0
    for schedule in outcome.tasks:
        latency, drop = term_components(
            schedule.local_fraction,
            schedule.breakdown.local_s,
            schedule.local_waiting_s,
            schedule.breakdown.comm_s,
            schedule.breakdown.mec_compute_s,
            schedule.breakdown.waiting_s,
            schedule.scheduled,
            schedule.dropped,
            drop_penalty,
        )
        latency_total += latency
        drop_total += drop

    value = ObjectiveValue(
        total=latency_total + drop_total,
        latency_component=latency_total,
        drop_component=drop_total,
        feasible=not violations,
    )
    return Assessment(value=value, outcome=outcome, violations=violations)


def evaluate(
    tasks: Sequence[Task],
    decision: Decision,
    mode: Mode,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    drop_penalty: Optional[DropPenalty] = None,
) -> ObjectiveValue:
    return assess(tasks, decision, mode, model, radio, servers, drop_penalty).value


class ObjectiveEvaluator:
    """
    Allocation-light objective for search loops.

    Works on per-task sequences in kernel (arrival) order and returns +inf for
    Partition-mode candidates that drop a portion. Values match evaluate() up
    to floating-point summation order.
    """

    def __init__(
        self,
        tasks: Sequence[Task],
        mode: Mode,
        model: ProcessingModel,
        radio: RadioConfig,
        servers: Optional[Sequence[ServerSpec]] = None,
        drop_penalty: Optional[DropPenalty] = None,
    ):
        self.mode = Mode(mode)
        self.drop_penalty = DropPenalty(drop_penalty or default_drop_penalty())
        self.kernel = ScheduleKernel(tasks, model, radio, servers)
        self.evaluations = 0

    def __len__(self) -> int:
        return len(self.kernel)

    def placement_cost(self, placement: Placement) -> float:
        """Term value of a placement, +inf when it breaks the zero-drop rule"""
        if placement.dropped and self.mode is Mode.PARTITION:
            return math.inf
        latency, drop = term_components(
            placement.local_fraction,
            placement.local_proc,
            placement.local_waiting,
            placement.comm,
            placement.proc,
            placement.waiting,
            placement.scheduled,
            placement.dropped,
            self.drop_penalty,
        )
        return latency + drop

    def cost(
        self,
        fractions: Sequence[float],
        server_indices: Sequence[Optional[int]],
        rb_counts: Sequence[int],
    ) -> float:
        self.evaluations += 1
        kernel = self.kernel
        state = kernel.new_state()
        total = 0.0
        for k in range(len(kernel)):
            placement = kernel.place(state, k, fractions[k], server_indices[k], rb_counts[k])
            term = self.placement_cost(placement)
            if term == math.inf:
                return math.inf
            kernel.commit(state, placement)
            total += term
        return total

    def to_decision(
        self,
        fractions: Sequence[float],
        server_indices: Sequence[Optional[int]],
        rb_counts: Sequence[int],
    ) -> Decision:
        servers = self.kernel.servers
        return Decision(
            items=tuple(
                TaskDecision(
                    task_id=task.id,
                    local_fraction=float(fractions[k]),
                    server=servers[server_indices[k]].id
                    if server_indices[k] is not None
                    else None,
                    rb_count=int(rb_counts[k]),
                )
                for k, task in enumerate(self.kernel.tasks)
            )
        )
