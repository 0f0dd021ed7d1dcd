import math
from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from app.config import settings

SEED_BOUND = 2**64


# ---------- Enumerations ----------


class Mode(str, Enum):
    """Processing scenario; restricts the local fraction of every task"""

    LOCAL_ONLY = "local_only"
    OFFLOAD_ONLY = "offload_only"
    PARTITION = "partition"

    def allows(self, local_fraction: float) -> bool:
        if self is Mode.LOCAL_ONLY:
            return local_fraction == 1.0
        if self is Mode.OFFLOAD_ONLY:
            return local_fraction == 0.0
        return 0.0 <= local_fraction <= 1.0


class Location(str, Enum):
    LOCAL = "local"
    MEC = "mec"


class DropPenalty(str, Enum):
    PER_TASK = "per_task"
    GLOBAL = "global"


class SolverName(str, Enum):
    EXACT = "exact"
    CUCKOO = "cuckoo"
    BASELINE = "baseline"


class ConstraintTag(str, Enum):
    START_BEFORE_ARRIVAL = "start_before_arrival"
    FIRST_START = "first_start"
    START_WINDOW = "start_window"
    RB_CAP = "rb_cap"
    UNKNOWN_SERVER = "unknown_server"
    FRACTION_REGIME = "fraction_regime"
    ZERO_DROP = "zero_drop"


def default_drop_penalty() -> DropPenalty:
    return DropPenalty(settings.DROP_PENALTY)


# ---------- Core model ----------


class Task(BaseModel):
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "id": 0,
                "ue_id": 3,
                "size_bits": 2000000.0,
                "arrival_s": 0.12,
                "deadline_s": 1.4,
            }
        },
    )

    id: int = Field(..., ge=0, description="Task identifier")
    ue_id: int = Field(..., ge=0, description="Owning user equipment")
    size_bits: PositiveFloat = Field(..., description="Payload size in bits")
    arrival_s: NonNegativeFloat = Field(..., description="Arrival time in seconds")
    deadline_s: float = Field(..., description="Absolute deadline in seconds")

    @model_validator(mode="after")
    def _deadline_after_arrival(self) -> "Task":
        if not self.deadline_s > self.arrival_s:
            raise ValueError(
                f"deadline_s ({self.deadline_s}) must be after arrival_s ({self.arrival_s})"
            )
        return self


class RadioConfig(BaseModel):
    """Channel constants; defaults give a 20 MHz carrier with 100 RBs"""

    model_config = ConfigDict(frozen=True)

    total_bandwidth_hz: PositiveFloat = 20e6
    guard_band_fraction: float = Field(0.1, ge=0.0, lt=1.0)
    rb_bandwidth_hz: PositiveFloat = 180e3
    tx_power_w: PositiveFloat = 0.2
    # p0 * g / n = 100, i.e. 20 dB SNR against a -100 dBm noise floor
    channel_gain: PositiveFloat = 5e-11
    noise_power_w: PositiveFloat = 1e-13

    @property
    def effective_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz * (1.0 - self.guard_band_fraction)

    @model_validator(mode="after")
    def _at_least_one_rb(self) -> "RadioConfig":
        if self.effective_bandwidth_hz < self.rb_bandwidth_hz * (1 - 1e-12):
            raise ValueError(
                "effective bandwidth must hold at least one resource block"
            )
        return self


class RadioAllocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    rb_count: PositiveInt
    bandwidth_hz: PositiveFloat

    @classmethod
    def for_radio(cls, rb_count: int, radio: RadioConfig) -> "RadioAllocation":
        return cls(rb_count=rb_count, bandwidth_hz=rb_count * radio.rb_bandwidth_hz)


class ServerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=1)
    cpu_count: PositiveInt = 1
    speed_factor: PositiveFloat = 1.0


def default_servers() -> List[ServerSpec]:
    """Two MEC servers with one CPU each"""
    return [ServerSpec(id=1), ServerSpec(id=2)]


def check_server_list(servers: List[ServerSpec]) -> List[ServerSpec]:
    if not servers:
        raise ValueError("at least one server is required")
    ids = [server.id for server in servers]
    if len(ids) != len(set(ids)):
        raise ValueError("server ids must be unique")
    return servers


class LatencyBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    local_s: NonNegativeFloat = 0.0
    comm_s: NonNegativeFloat = 0.0
    mec_compute_s: NonNegativeFloat = 0.0
    waiting_s: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _finite(self) -> "LatencyBreakdown":
        for name in ("local_s", "comm_s", "mec_compute_s", "waiting_s"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self


# ---------- Workload ----------


DEFAULT_SIZE_CLASSES: List[Tuple[float, float]] = [
    (0.5e6, 0.3),
    (2e6, 0.4),
    (8e6, 0.3),
]


class WorkloadSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_count: PositiveInt
    max_tasks: PositiveInt = 400
    arrival_rate_per_s: PositiveFloat
    size_classes: List[Tuple[PositiveFloat, NonNegativeFloat]] = Field(
        default_factory=lambda: list(DEFAULT_SIZE_CLASSES)
    )
    deadline_slack: Tuple[PositiveFloat, PositiveFloat] = (0.5, 2.0)
    horizon_s: PositiveFloat = 10.0
    seed: int = Field(0, ge=0, lt=SEED_BOUND)

    @field_validator("size_classes")
    @classmethod
    def _weights_sum_to_one(cls, value):
        if value:
            total = sum(weight for _, weight in value)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"size class weights must sum to 1, got {total}")
        return value

    @field_validator("deadline_slack")
    @classmethod
    def _ordered_slack(cls, value):
        if value[0] > value[1]:
            raise ValueError("deadline_slack minimum exceeds maximum")
        return value


class ProcessingModel(BaseModel):
    """Linear processing-time model; a fraction p of a task takes p of the time"""

    model_config = ConfigDict(frozen=True)

    local_rate_bits_per_s: PositiveFloat = 12.5e6
    mec_rate_bits_per_s: PositiveFloat = 50e6

    @model_validator(mode="after")
    def _mec_is_faster(self) -> "ProcessingModel":
        if not self.mec_rate_bits_per_s > self.local_rate_bits_per_s:
            raise ValueError("mec_rate_bits_per_s must exceed local_rate_bits_per_s")
        return self


# ---------- Decisions and schedules ----------


class TaskDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: int
    local_fraction: float = Field(..., ge=0.0, le=1.0, description="Share of the task processed on its UE")
    server: Optional[int] = Field(
        None, description="Server receiving the offloaded share, absent when unassigned"
    )
    rb_count: PositiveInt = Field(..., description="Resource blocks granted")


class Decision(BaseModel):
    model_config = ConfigDict(frozen=True)

    items: Tuple[TaskDecision, ...] = ()

    @field_validator("items")
    @classmethod
    def _one_entry_per_task(cls, value):
        ids = [item.task_id for item in value]
        if len(ids) != len(set(ids)):
            raise ValueError("decision lists a task more than once")
        return value

    def by_task(self) -> Dict[int, TaskDecision]:
        return {item.task_id: item for item in self.items}

    @classmethod
    def uniform(
        cls,
        tasks,
        local_fraction: float,
        rb_count: int,
        server: Optional[int] = None,
    ) -> "Decision":
        return cls(
            items=tuple(
                TaskDecision(
                    task_id=task.id,
                    local_fraction=local_fraction,
                    server=server,
                    rb_count=rb_count,
                )
                for task in tasks
            )
        )


class TaskSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: int
    ue_id: int
    arrival_s: float
    deadline_s: float
    local_fraction: float
    requested_server: Optional[int]
    server: Optional[int] = Field(None, description="Executing server, none if dropped")
    cpu: Optional[int] = None
    rb_count: int
    ready_s: Optional[float] = Field(None, description="Arrival of the portion at its server")
    start_s: Optional[float] = None
    end_s: Optional[float] = None
    waiting_s: NonNegativeFloat = 0.0
    local_start_s: Optional[float] = None
    local_end_s: Optional[float] = None
    local_waiting_s: NonNegativeFloat = 0.0
    breakdown: LatencyBreakdown
    dropped: bool = False
    completion_s: float

    @property
    def offloaded(self) -> bool:
        return self.local_fraction < 1.0

    @property
    def scheduled(self) -> bool:
        return self.server is not None and not self.dropped


class ScheduleOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    tasks: Tuple[TaskSchedule, ...] = ()
    total_latency_s: NonNegativeFloat = 0.0
    drop_count: int = Field(0, ge=0)
    mec_busy_s: Dict[int, float] = Field(default_factory=dict)
    mec_capacity: Dict[int, int] = Field(default_factory=dict)
    local_busy_s: Dict[int, float] = Field(default_factory=dict)
    last_completion_s: NonNegativeFloat = 0.0


class ObjectiveValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    total: float
    latency_component: float
    drop_component: NonNegativeFloat
    feasible: bool

    @model_validator(mode="after")
    def _components_add_up(self) -> "ObjectiveValue":
        expected = self.latency_component + self.drop_component
        if not math.isclose(self.total, expected, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("total must equal latency_component + drop_component")
        return self


class ConstraintViolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: Optional[int]
    constraint: ConstraintTag
    detail: str = ""


# ---------- Solvers ----------


class CuckooConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    nest_count: PositiveInt = 25
    iterations: PositiveInt = 100
    abandonment_prob: float = Field(0.25, ge=0.0, le=1.0)
    levy_lambda: float = Field(1.5, gt=1.0)
    seed: int = Field(7, ge=0, lt=SEED_BOUND)
    step_scale: PositiveFloat = 0.05
    move_share: float = Field(
        0.05, gt=0.0, le=1.0, description="Chance that a cuckoo moves each task of its nest"
    )


class ExactConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_grid_step: float = Field(0.05, gt=0.0, le=1.0)
    rb_choices: List[PositiveInt] = Field(default_factory=lambda: [50, 100])
    node_limit: Optional[PositiveInt] = Field(
        10_000, description="Expanded-node budget; None searches exhaustively"
    )

    @field_validator("p_grid_step")
    @classmethod
    def _integral_grid(cls, value):
        steps = 1.0 / value
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("1 / p_grid_step must be an integer")
        return value

    @field_validator("rb_choices")
    @classmethod
    def _non_empty_choices(cls, value):
        if not value:
            raise ValueError("rb_choices must not be empty")
        return sorted(set(value))

    @property
    def grid_points(self) -> int:
        return int(round(1.0 / self.p_grid_step))


class TracePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    iteration: int
    best_objective: float


class SolveResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    solver: SolverName
    mode: Mode
    best_decision: Decision
    best_value: ObjectiveValue
    trace: List[TracePoint] = Field(default_factory=list)
    evaluations: int = Field(0, ge=0)
    wall_time_s: NonNegativeFloat = 0.0
    optimal: Optional[bool] = None
    lower_bound: Optional[float] = None

    @field_validator("trace")
    @classmethod
    def _non_increasing(cls, value):
        for previous, current in zip(value, value[1:]):
            if current.best_objective > previous.best_objective:
                raise ValueError("trace must be non-increasing")
        return value


# ---------- Experiments ----------


class WorkloadTemplate(BaseModel):
    """WorkloadSpec without the per-grid-point fields (UE count, rate, seed)"""

    model_config = ConfigDict(frozen=True)

    max_tasks: PositiveInt = 400
    arrival_rate_per_ue_per_s: PositiveFloat = 0.1
    horizon_s: PositiveFloat = 10.0
    size_classes: List[Tuple[PositiveFloat, NonNegativeFloat]] = Field(
        default_factory=lambda: list(DEFAULT_SIZE_CLASSES)
    )
    deadline_slack: Tuple[PositiveFloat, PositiveFloat] = (0.5, 2.0)

    def spec_for(self, ue_count: int, seed: int) -> WorkloadSpec:
        return WorkloadSpec(
            ue_count=ue_count,
            max_tasks=self.max_tasks,
            arrival_rate_per_s=self.arrival_rate_per_ue_per_s * ue_count,
            size_classes=self.size_classes,
            deadline_slack=self.deadline_slack,
            horizon_s=self.horizon_s,
            seed=seed,
        )


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    radio: RadioConfig = Field(default_factory=RadioConfig)
    servers: List[ServerSpec] = Field(default_factory=default_servers)
    processing: ProcessingModel = Field(default_factory=ProcessingModel)
    workload: WorkloadTemplate = Field(default_factory=WorkloadTemplate)
    ue_counts: List[PositiveInt] = Field(default_factory=lambda: [50, 100, 200, 400])
    modes: List[Mode] = Field(
        default_factory=lambda: [Mode.OFFLOAD_ONLY, Mode.PARTITION]
    )
    solvers: List[SolverName] = Field(
        default_factory=lambda: [SolverName.EXACT, SolverName.CUCKOO]
    )
    cuckoo: CuckooConfig = Field(default_factory=CuckooConfig)
    exact: ExactConfig = Field(default_factory=ExactConfig)
    runs_per_point: PositiveInt = 10
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=SEED_BOUND)
    drop_penalty: DropPenalty = Field(default_factory=default_drop_penalty)
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    record_wall_time: bool = Field(default_factory=lambda: settings.RECORD_WALL_TIME)

    @field_validator("ue_counts", "modes", "solvers")
    @classmethod
    def _non_empty(cls, value):
        if not value:
            raise ValueError("must list at least one entry")
        return value

    @field_validator("servers")
    @classmethod
    def _unique_servers(cls, value):
        return check_server_list(value)


class RunSeed(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_count: int
    run: int
    workload_seed: int
    cuckoo_seed: int


class RunRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_count: int
    mode: Mode
    solver: SolverName
    run: int
    workload_seed: int
    task_count: int
    objective: float
    latency_component: float
    drop_component: float
    feasible: bool
    mean_latency_s: float
    drops: int
    mec_util: float
    local_util: float
    mean_makespan_s: float
    evaluations: int
    wall_time_s: float


class AggregateRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_count: int
    mode: Mode
    solver: SolverName
    mean_latency_s: float
    std_latency_s: float
    mean_drops: float
    mec_util: float
    local_util: float
    mean_walltime_s: float


class TraceRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_count: int
    mode: Mode
    solver: SolverName
    run: int
    points: List[TracePoint]


class ExperimentReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    seeds: List[RunSeed] = Field(default_factory=list)
    rows: List[RunRow] = Field(default_factory=list)
    aggregates: List[AggregateRow] = Field(default_factory=list)
    traces: List[TraceRecord] = Field(default_factory=list)


class ExperimentManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    format_version: int = 1
    config: ExperimentConfig
    seeds: List[RunSeed]


# ---------- HTTP service ----------


class WorkloadRequest(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "example": {"ue_count": 50, "arrival_rate_per_s": 5.0, "seed": 1}
        }
    )

    ue_count: PositiveInt
    arrival_rate_per_s: PositiveFloat
    max_tasks: PositiveInt = 400
    horizon_s: PositiveFloat = 10.0
    seed: int = Field(0, ge=0, lt=SEED_BOUND)


class WorkloadResponse(BaseModel):
    tasks: List[Task]
    count: int


class EvaluateRequest(BaseModel):
    tasks: List[Task]
    decision: Decision
    mode: Mode
    radio: RadioConfig = Field(default_factory=RadioConfig)
    processing: ProcessingModel = Field(default_factory=ProcessingModel)
    servers: List[ServerSpec] = Field(default_factory=default_servers)
    drop_penalty: DropPenalty = Field(default_factory=default_drop_penalty)

    @field_validator("servers")
    @classmethod
    def _unique_servers(cls, value):
        return check_server_list(value)


class EvaluateResponse(BaseModel):
    value: ObjectiveValue
    violations: List[ConstraintViolation]
    drop_count: int
    mec_utilization: float
    local_utilization: float


class SolveRequest(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={"example": {"tasks": [], "mode": "partition", "solver": "exact"}}
    )

    tasks: List[Task]
    mode: Mode
    solver: SolverName = SolverName.EXACT
    radio: RadioConfig = Field(default_factory=RadioConfig)
    processing: ProcessingModel = Field(default_factory=ProcessingModel)
    servers: List[ServerSpec] = Field(default_factory=default_servers)
    cuckoo: CuckooConfig = Field(default_factory=CuckooConfig)
    exact: ExactConfig = Field(default_factory=ExactConfig)
    drop_penalty: DropPenalty = Field(default_factory=default_drop_penalty)

    @field_validator("servers")
    @classmethod
    def _unique_servers(cls, value):
        return check_server_list(value)


class HealthResponse(BaseModel):
    status: str
    solvers: List[SolverName]
    timestamp: datetime
