"""
Cuckoo Search over a continuous encoding of the offloading decision.

Each nest holds three coordinates per task, laid out as one flat vector

    [ p_0 .. p_{n-1} | server_0 .. server_{n-1} | rb_0 .. rb_{n-1} ]

with p in [0, 1], the server coordinate in [0, M] and the RB coordinate in
[1, rb_max]. NestCodec owns the mapping to a Decision; swapping the rounding
scheme only touches that class.
"""

import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma

from app.exact_solver import first_dive_decision
from app.models import (
    CuckooConfig,
    Decision,
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
from app.scheduler import ScheduleKernel, resolve_decision
from app.solver_common import build_result, local_only_decision

logger = logging.getLogger(__name__)

# Server coordinate written for an unassigned task
UNASSIGNED_COORD = 0.5


def mantegna_sigma(levy_lambda: float) -> float:
    return (
        gamma(1 + levy_lambda)
        * math.sin(math.pi * levy_lambda / 2)
        / (gamma((1 + levy_lambda) / 2) * levy_lambda * 2 ** ((levy_lambda - 1) / 2))
    ) ** (1 / levy_lambda)


def levy_steps(rng: np.random.Generator, shape, levy_lambda: float) -> np.ndarray:
    """Mantegna's construction of Lévy-stable steps with exponent levy_lambda"""
    u = rng.normal(0.0, mantegna_sigma(levy_lambda), size=shape)
    v = rng.normal(0.0, 1.0, size=shape)
    return u / np.power(np.abs(v), 1 / levy_lambda)


class NestCodec:
    def __init__(self, kernel: ScheduleKernel, mode: Mode):
        self.kernel = kernel
        self.mode = mode
        self.n = len(kernel)
        self.server_count = len(kernel.servers)
        self.rb_cap = kernel.rb_max
        n = self.n
        self.lower = np.concatenate([np.zeros(n), np.zeros(n), np.ones(n)])
        self.upper = np.concatenate(
            [np.ones(n), np.full(n, float(self.server_count)), np.full(n, float(self.rb_cap))]
        )
        self.span = self.upper - self.lower
        # fresh nests always name a server
        self.seed_lower = self.lower.copy()
        self.seed_lower[n : 2 * n] = 1.0

    @property
    def dim(self) -> int:
        return 3 * self.n

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def random(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.seed_lower, self.upper, size=(count, self.dim))

    def decode(self, x: np.ndarray) -> Tuple[List[float], List[Optional[int]], List[int]]:
        n = self.n
        if self.mode is Mode.OFFLOAD_ONLY:
            p = np.zeros(n)
        elif self.mode is Mode.LOCAL_ONLY:
            p = np.ones(n)
        else:
            p = np.clip(x[:n], 0.0, 1.0)

        coord = x[n : 2 * n]
        index = np.minimum(self.server_count, np.floor(coord + 0.5)).astype(int) - 1
        index[(coord < 1.0) | (p >= 1.0)] = -1
        rb = np.clip(np.floor(x[2 * n :] + 0.5), 1, self.rb_cap).astype(int)

        servers = [None if j < 0 else j for j in index.tolist()]
        return p.tolist(), servers, rb.tolist()

    def encode(self, decision: Decision) -> np.ndarray:
        x = np.empty(self.dim)
        n = self.n
        for k, (p, server_index, rb) in enumerate(resolve_decision(self.kernel, decision)):
            x[k] = p
            x[n + k] = UNASSIGNED_COORD if server_index is None else server_index + 1
            x[2 * n + k] = rb
        return self.clip(x)

    def anchor(self) -> np.ndarray:
        """All-local nest; server and RB coordinates spread over the valid range"""
        n = self.n
        x = np.empty(self.dim)
        x[:n] = 1.0
        x[n : 2 * n] = 1 + np.arange(n) % self.server_count
        x[2 * n :] = self.rb_cap
        return x


def solve_cuckoo(
    tasks: Sequence[Task],
    mode: Mode,
    cfg: CuckooConfig,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    drop_penalty: Optional[DropPenalty] = None,
    initial_decisions: Sequence[Decision] = (),
) -> SolveResult:
    """
    Each cuckoo moves a random subset of the tasks of its nest (every task with
    probability move_share, at least one) by a scaled Lévy flight, and replaces
    the nest when it is better. Afterwards the worst
    ceil(abandonment_prob * nest_count) nests are rebuilt at random. The best
    nest ever seen is kept and reported. All random numbers of an iteration are
    drawn before any evaluation, in nest order.

    Nests whose decoded decision drops a portion in Partition mode score +inf.
    After initial_decisions come two seeded nests: in Partition mode the
    all-local point, so a feasible nest exists from the start, and outside
    LocalOnly the greedy decision of the branch-and-bound's first dive.
    """
    started = time.perf_counter()
    mode = Mode(mode)
    evaluator = ObjectiveEvaluator(tasks, mode, model, radio, servers, drop_penalty)
    if not tasks:
        return build_result(
            SolverName.CUCKOO,
            mode,
            tasks,
            Decision(),
            model,
            radio,
            servers,
            evaluator.drop_penalty,
            [(0, 0.0)],
            0,
            started,
        )

    codec = NestCodec(evaluator.kernel, mode)
    rng = np.random.default_rng(cfg.seed)
    count = cfg.nest_count

    def fitness_of(x: np.ndarray) -> float:
        return evaluator.cost(*codec.decode(x))

    nests = codec.random(rng, count)
    seeded = [codec.encode(decision) for decision in list(initial_decisions)[:count]]
    if mode is Mode.PARTITION:
        seeded.append(codec.anchor())
    dive_evaluations = 0
    if mode is not Mode.LOCAL_ONLY and len(seeded) < count:
        dive, dive_evaluations = first_dive_decision(
            evaluator, ExactConfig(rb_choices=[codec.rb_cap])
        )
        seeded.append(codec.encode(dive))
    for i, x in enumerate(seeded[:count]):
        nests[i] = x

    fitness = np.array([fitness_of(x) for x in nests])
    best_index = int(np.argmin(fitness))
    best_nest = nests[best_index].copy()
    best_value = float(fitness[best_index])
    trace = [(0, best_value)]

    abandon_count = math.ceil(cfg.abandonment_prob * count)
    scale = cfg.step_scale * codec.span
    rows = np.arange(count)

    for iteration in range(1, cfg.iterations + 1):
        steps = levy_steps(rng, (count, codec.dim), cfg.levy_lambda) * scale
        moved = rng.random((count, codec.n)) < cfg.move_share
        moved[rows, rng.integers(codec.n, size=count)] = True
        rebuilt = codec.random(rng, abandon_count)

        cuckoos = codec.clip(nests + steps * np.tile(moved, 3))
        cuckoo_fitness = np.array([fitness_of(x) for x in cuckoos])
        improved = cuckoo_fitness < fitness
        nests[improved] = cuckoos[improved]
        fitness[improved] = cuckoo_fitness[improved]

        if abandon_count:
            worst = np.argsort(-fitness, kind="stable")[:abandon_count]
            nests[worst] = rebuilt
            fitness[worst] = [fitness_of(x) for x in rebuilt]

        candidate = int(np.argmin(fitness))
        if fitness[candidate] < best_value:
            best_value = float(fitness[candidate])
            best_nest = nests[candidate].copy()
        trace.append((iteration, best_value))
        if iteration % 10 == 0:
            logger.debug(f"Cuckoo iteration {iteration}: best {best_value:.6f}")

    if math.isinf(best_value):
        logger.warning("Cuckoo search found no feasible nest; using the all-local decision")
        decision = local_only_decision(tasks, radio)
    else:
        decision = evaluator.to_decision(*codec.decode(best_nest))
    return build_result(
        SolverName.CUCKOO,
        mode,
        tasks,
        decision,
        model,
        radio,
        servers,
        evaluator.drop_penalty,
        trace,
        evaluator.evaluations + dive_evaluations,
        started,
    )
