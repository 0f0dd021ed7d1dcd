"""
Non-preemptive FCFS execution of a Decision.

Offloaded portions queue on their server's CPUs and local portions on the
owning UE, both in arrival order (ties by task id). Because every queue is
served in arrival order, the schedule of a task depends only on the tasks
before it; ScheduleKernel exposes that step so solvers can extend a partial
schedule one task at a time and undo it.
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from app.errors import InvalidArgumentError
from app.models import (
    Decision,
    LatencyBreakdown,
    Location,
    ProcessingModel,
    RadioConfig,
    ScheduleOutcome,
    ServerSpec,
    Task,
    TaskSchedule,
    default_servers,
)
from app.radio import rb_max, spectral_efficiency
from app.workload import processing_time

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class Placement:
    """Where and when one task runs, given the tasks placed before it"""

    index: int
    local_fraction: float
    requested_server: Optional[int]
    rb_count: int
    local_start: Optional[float] = None
    local_waiting: float = 0.0
    local_proc: float = 0.0
    server_index: Optional[int] = None
    cpu: Optional[int] = None
    ready: Optional[float] = None
    start: Optional[float] = None
    waiting: float = 0.0
    proc: float = 0.0
    comm: float = 0.0
    dropped: bool = False

    @property
    def scheduled(self) -> bool:
        return self.server_index is not None and not self.dropped


class ScheduleState:
    __slots__ = ("cpu_free", "ue_free", "mec_busy", "local_busy")

    def __init__(self, cpu_counts: Sequence[int]):
        self.cpu_free: List[List[float]] = [[0.0] * count for count in cpu_counts]
        self.ue_free: Dict[int, float] = {}
        self.mec_busy: List[float] = [0.0] * len(cpu_counts)
        self.local_busy: Dict[int, float] = {}


class ScheduleKernel:
    """Per-instance constants plus the place / commit / undo step"""

    def __init__(
        self,
        tasks: Sequence[Task],
        model: ProcessingModel,
        radio: RadioConfig,
        servers: Optional[Sequence[ServerSpec]] = None,
    ):
        servers = list(servers) if servers is not None else default_servers()
        if not servers:
            raise InvalidArgumentError("at least one server is required")
        self.tasks: List[Task] = sorted(tasks, key=lambda task: (task.arrival_s, task.id))
        self.position: Dict[int, int] = {task.id: k for k, task in enumerate(self.tasks)}
        if len(self.position) != len(self.tasks):
            raise InvalidArgumentError("task ids must be unique")

        self.servers: List[ServerSpec] = sorted(servers, key=lambda server: server.id)
        self.server_index: Dict[int, int] = {
            server.id: j for j, server in enumerate(self.servers)
        }
        self.cpu_counts = [server.cpu_count for server in self.servers]
        self.speed_factors = [server.speed_factor for server in self.servers]
        self.bits_per_rb = radio.rb_bandwidth_hz * spectral_efficiency(radio)
        self.rb_max = rb_max(radio)

        self.sizes = [task.size_bits for task in self.tasks]
        self.arrivals = [task.arrival_s for task in self.tasks]
        self.deadlines = [task.deadline_s for task in self.tasks]
        self.owners = [task.ue_id for task in self.tasks]
        # whole-task times; portions scale linearly
        self.local_times = [processing_time(size, model, Location.LOCAL) for size in self.sizes]
        self.mec_times = [processing_time(size, model, Location.MEC) for size in self.sizes]

    def __len__(self) -> int:
        return len(self.tasks)

    def new_state(self) -> ScheduleState:
        return ScheduleState(self.cpu_counts)

    def place(
        self,
        state: ScheduleState,
        k: int,
        local_fraction: float,
        server_index: Optional[int],
        rb_count: int,
    ) -> Placement:
        size = self.sizes[k]
        arrival = self.arrivals[k]
        placement = Placement(
            index=k,
            local_fraction=local_fraction,
            requested_server=(
                self.servers[server_index].id if server_index is not None else None
            ),
            rb_count=rb_count,
        )

        if local_fraction > 0.0:
            free = state.ue_free.get(self.owners[k], 0.0)
            local_start = arrival if arrival >= free else free
            placement.local_start = local_start
            placement.local_waiting = local_start - arrival
            placement.local_proc = local_fraction * self.local_times[k]

        offload_bits = (1.0 - local_fraction) * size
        if offload_bits <= 0.0:
            return placement
        if server_index is None:
            placement.dropped = True
            return placement

        rate = rb_count * self.bits_per_rb
        uplink = offload_bits / rate
        comm = 2.0 * uplink
        ready = arrival + uplink
        cpu_free = state.cpu_free[server_index]
        cpu = min(range(len(cpu_free)), key=cpu_free.__getitem__)
        start = ready if ready >= cpu_free[cpu] else cpu_free[cpu]
        proc = (1.0 - local_fraction) * self.mec_times[k] / self.speed_factors[server_index]

        placement.ready = ready
        if start > self.deadlines[k] - proc - comm:
            placement.dropped = True
            return placement

        placement.server_index = server_index
        placement.cpu = cpu
        placement.start = start
        placement.waiting = start - ready
        placement.proc = proc
        placement.comm = comm
        return placement

    def commit(self, state: ScheduleState, placement: Placement) -> Tuple:
        """Apply a placement; the returned token restores the previous state"""
        owner = self.owners[placement.index]
        token = (
            owner,
            state.ue_free.get(owner),
            state.local_busy.get(owner),
            placement.server_index if placement.scheduled else None,
            placement.cpu,
            None,
            None,
        )
        if placement.local_start is not None:
            state.ue_free[owner] = placement.local_start + placement.local_proc
            state.local_busy[owner] = state.local_busy.get(owner, 0.0) + placement.local_proc
        if placement.scheduled:
            j, cpu = placement.server_index, placement.cpu
            token = token[:5] + (state.cpu_free[j][cpu], state.mec_busy[j])
            state.cpu_free[j][cpu] = placement.start + placement.proc
            state.mec_busy[j] += placement.proc
        return token

    def undo(self, state: ScheduleState, token: Tuple) -> None:
        owner, ue_free, local_busy, j, cpu, cpu_free, mec_busy = token
        if ue_free is None:
            state.ue_free.pop(owner, None)
        else:
            state.ue_free[owner] = ue_free
        if local_busy is None:
            state.local_busy.pop(owner, None)
        else:
            state.local_busy[owner] = local_busy
        if j is not None:
            state.cpu_free[j][cpu] = cpu_free
            state.mec_busy[j] = mec_busy


def resolve_decision(
    kernel: ScheduleKernel, decision: Decision
) -> List[Tuple[float, Optional[int], int]]:
    """Decision entries in kernel order as (p, server index, rb count)"""
    entries = decision.by_task()
    if set(entries) != set(kernel.position):
        missing = sorted(set(kernel.position) - set(entries))
        extra = sorted(set(entries) - set(kernel.position))
        raise InvalidArgumentError(
            f"decision does not match the task list (missing {missing}, unknown {extra})"
        )
    resolved = []
    for task in kernel.tasks:
        item = entries[task.id]
        if item.server is None:
            server_index = None
        elif item.server in kernel.server_index:
            server_index = kernel.server_index[item.server]
        else:
            raise InvalidArgumentError(
                f"task {task.id} is assigned to unknown server {item.server}"
            )
        resolved.append((item.local_fraction, server_index, item.rb_count))
    return resolved


def _task_schedule(kernel: ScheduleKernel, placement: Placement) -> TaskSchedule:
    task = kernel.tasks[placement.index]
    local_end = None
    completion = task.arrival_s
    if placement.local_start is not None:
        local_end = placement.local_start + placement.local_proc
        completion = max(completion, local_end)
    end = None
    if placement.scheduled:
        end = placement.start + placement.proc
        completion = max(completion, end + placement.comm / 2.0)
    return TaskSchedule(
        task_id=task.id,
        ue_id=task.ue_id,
        arrival_s=task.arrival_s,
        deadline_s=task.deadline_s,
        local_fraction=placement.local_fraction,
        requested_server=placement.requested_server,
        server=kernel.servers[placement.server_index].id if placement.scheduled else None,
        cpu=placement.cpu if placement.scheduled else None,
        rb_count=placement.rb_count,
        ready_s=placement.ready,
        start_s=placement.start if placement.scheduled else None,
        end_s=end,
        waiting_s=placement.waiting,
        local_start_s=placement.local_start,
        local_end_s=local_end,
        local_waiting_s=placement.local_waiting,
        breakdown=LatencyBreakdown(
            local_s=placement.local_proc,
            comm_s=placement.comm,
            mec_compute_s=placement.proc,
            waiting_s=placement.waiting,
        ),
        dropped=placement.dropped,
        completion_s=completion,
    )


def simulate(
    tasks: Sequence[Task],
    decision: Decision,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
) -> ScheduleOutcome:
    kernel = ScheduleKernel(tasks, model, radio, servers)
    resolved = resolve_decision(kernel, decision)
    state = kernel.new_state()

    schedules = []
    for k, (local_fraction, server_index, rb_count) in enumerate(resolved):
        placement = kernel.place(state, k, local_fraction, server_index, rb_count)
        kernel.commit(state, placement)
        schedules.append(_task_schedule(kernel, placement))

    drops = sum(1 for item in schedules if item.dropped)
    total_latency = sum(
        item.breakdown.local_s
        + item.local_waiting_s
        + item.breakdown.comm_s
        + item.breakdown.mec_compute_s
        + item.breakdown.waiting_s
        for item in schedules
    )
    if drops:
        logger.debug(f"Simulation dropped {drops} of {len(schedules)} tasks")
    return ScheduleOutcome(
        tasks=tuple(schedules),
        total_latency_s=total_latency,
        drop_count=drops,
        mec_busy_s={server.id: state.mec_busy[j] for j, server in enumerate(kernel.servers)},
        mec_capacity={server.id: server.cpu_count for server in kernel.servers},
        local_busy_s={
            owner: state.local_busy.get(owner, 0.0) for owner in sorted(set(kernel.owners))
        },
        last_completion_s=max((item.completion_s for item in schedules), default=0.0),
    )


def drop_count(outcome: ScheduleOutcome) -> int:
    """Offload-participating tasks left without a server"""
    return sum(1 for item in outcome.tasks if item.offloaded and item.dropped)


def utilization(outcome: ScheduleOutcome, horizon_s: float) -> Tuple[float, float]:
    """Mean busy share over servers (per CPU) and over every UE that owns a task"""
    if not horizon_s > 0:
        raise InvalidArgumentError("horizon_s must be positive")
    if horizon_s < outcome.last_completion_s:
        raise InvalidArgumentError(
            f"horizon {horizon_s} s ends before the last completion at "
            f"{outcome.last_completion_s} s"
        )
    mec = [
        outcome.mec_busy_s.get(server_id, 0.0) / (capacity * horizon_s)
        for server_id, capacity in outcome.mec_capacity.items()
    ]
    local = [busy / horizon_s for busy in outcome.local_busy_s.values()]
    mec_utilization = sum(mec) / len(mec) if mec else 0.0
    local_utilization = sum(local) / len(local) if local else 0.0
    return mec_utilization, local_utilization


def export_schedule_csv(outcome: ScheduleOutcome, path: str) -> str:
    """Per-task trace: task, server, start, end, dropped"""
    frame = pd.DataFrame(
        [
            {
                "task": item.task_id,
                "server": item.server if item.server is not None else "",
                "start": item.start_s if item.start_s is not None else "",
                "end": item.end_s if item.end_s is not None else "",
                "dropped": item.dropped,
            }
            for item in outcome.tasks
        ],
        columns=["task", "server", "start", "end", "dropped"],
    )
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False)
    return path
