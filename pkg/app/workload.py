"""
Seeded workload generation: Poisson arrivals, discrete image-size classes and
uniform deadline slack. Also the linear processing-time model and the
JSON-lines workload file format used to replay experiments.
"""

import logging
import os
from typing import Iterable, List

import numpy as np
from pydantic import ValidationError

from app.errors import InvalidArgumentError, InvalidSpecError
from app.models import Location, ProcessingModel, Task, WorkloadSpec

logger = logging.getLogger(__name__)


def draw_interarrival_gaps(
    rate_per_s: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """i.i.d. exponential gaps of a Poisson process with the given rate"""
    if not rate_per_s > 0:
        raise InvalidArgumentError("arrival rate must be positive")
    return rng.exponential(1.0 / rate_per_s, size=count)


def generate_workload(spec: WorkloadSpec) -> List[Task]:
    """
    Draw a task list sorted by arrival.

    Arrivals are kept while they fall inside the generation horizon, up to
    max_tasks. Draw order is fixed (gaps, sizes, owners, slack), so a spec and
    its seed fully determine the result.
    """
    if not spec.size_classes:
        raise InvalidSpecError("size_classes must not be empty")

    rng = np.random.default_rng(spec.seed)
    arrivals = np.cumsum(draw_interarrival_gaps(spec.arrival_rate_per_s, spec.max_tasks, rng))
    count = int(np.searchsorted(arrivals, spec.horizon_s, side="right"))
    arrivals = arrivals[:count]

    sizes = np.array([size for size, _ in spec.size_classes], dtype=float)
    weights = np.array([weight for _, weight in spec.size_classes], dtype=float)
    size_index = rng.choice(len(sizes), size=count, p=weights / weights.sum())
    owners = rng.integers(0, spec.ue_count, size=count)
    slack_min, slack_max = spec.deadline_slack
    slack = rng.uniform(slack_min, slack_max, size=count)

    tasks = [
        Task(
            id=i,
            ue_id=int(owners[i]),
            size_bits=float(sizes[size_index[i]]),
            arrival_s=float(arrivals[i]),
            deadline_s=float(arrivals[i] + slack[i]),
        )
        for i in range(count)
    ]
    logger.debug(
        f"Generated {count} tasks for {spec.ue_count} UEs (seed {spec.seed}, "
        f"rate {spec.arrival_rate_per_s}/s)"
    )
    return tasks


def processing_time(task_bits: float, model: ProcessingModel, where: Location) -> float:
    if not task_bits > 0:
        raise InvalidArgumentError("task_bits must be positive")
    if Location(where) is Location.LOCAL:
        return task_bits / model.local_rate_bits_per_s
    return task_bits / model.mec_rate_bits_per_s


def write_workload(tasks: Iterable[Task], path: str) -> str:
    """One JSON record per line; floats survive the round trip bit-exactly"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    partial = f"{path}.partial"
    with open(partial, "w", encoding="utf-8") as handle:
        for task in tasks:
            handle.write(task.model_dump_json())
            handle.write("\n")
    os.replace(partial, path)
    return path


def read_workload(path: str) -> List[Task]:
    tasks = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                tasks.append(Task.model_validate_json(line))
            except ValidationError as e:
                raise InvalidSpecError(f"{path}:{line_number}: invalid task record: {e}")
    tasks.sort(key=lambda task: (task.arrival_s, task.id))
    return tasks
