"""
Grid-discretized branch-and-bound over (server, local fraction, RB count).

Tasks are branched in arrival order. Since every queue is FCFS by arrival, a
prefix of decisions fixes the prefix of the schedule, so each branch adds the
exact objective term of its task. Undecided tasks are bounded by their cost on
an empty system (no queueing), which no real schedule can undercut.
"""

import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

from app.errors import InvalidArgumentError
from app.models import (
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
from app.radio import rb_max
from app.scheduler import Placement
from app.solver_common import build_result

logger = logging.getLogger(__name__)

PRUNE_TOLERANCE = 1e-12

# (local fraction, server index or None, rb count)
Option = Tuple[float, Optional[int], int]


def fraction_grid(mode: Mode, config: ExactConfig) -> List[float]:
    if mode is Mode.LOCAL_ONLY:
        return [1.0]
    if mode is Mode.OFFLOAD_ONLY:
        return [0.0]
    points = config.grid_points
    return [k / points for k in range(points + 1)]


def candidate_options(
    mode: Mode, fractions: Sequence[float], server_count: int, rb_choices: Sequence[int]
) -> List[Option]:
    """
    Distinct per-task choices. A fully local task has no server or RB choice,
    and an unassigned portion is only worth listing where drops are allowed.
    """
    top = max(rb_choices)
    options: List[Option] = []
    for p in fractions:
        if p == 1.0:
            options.append((1.0, None, top))
            continue
        if mode is Mode.OFFLOAD_ONLY:
            options.append((p, None, top))
        for j in range(server_count):
            for rb in rb_choices:
                options.append((p, j, rb))
    return options


class _Frame:
    __slots__ = ("k", "acc", "children", "cursor", "token")

    def __init__(self, k: int, acc: float, children: list):
        self.k = k
        self.acc = acc
        self.children = children
        self.cursor = 0
        self.token = None


class BranchAndBound:
    def __init__(
        self,
        evaluator: ObjectiveEvaluator,
        options: Sequence[Option],
        node_limit: Optional[int],
    ):
        self.evaluator = evaluator
        self.kernel = evaluator.kernel
        self.options = list(options)
        self.node_limit = node_limit
        self.state = self.kernel.new_state()
        self.evaluations = 0
        self.suffix = self._suffix_bounds()

    def _suffix_bounds(self) -> List[float]:
        empty = self.kernel.new_state()
        best_case = []
        for k in range(len(self.kernel)):
            costs = [
                self.evaluator.placement_cost(self.kernel.place(empty, k, p, j, rb))
                for p, j, rb in self.options
            ]
            self.evaluations += len(costs)
            best_case.append(min(costs))
        suffix = [0.0] * (len(best_case) + 1)
        for k in range(len(best_case) - 1, -1, -1):
            suffix[k] = suffix[k + 1] + best_case[k]
        return suffix

    def _expand(self, k: int, acc: float) -> _Frame:
        children: List[Tuple[float, int, int, Placement]] = []
        for rank, (p, j, rb) in enumerate(self.options):
            placement = self.kernel.place(self.state, k, p, j, rb)
            cost = self.evaluator.placement_cost(placement)
            self.evaluations += 1
            if cost == math.inf:
                continue
            children.append((cost, -1 if j is None else j, rank, placement))
        children.sort(key=lambda child: child[:3])
        return _Frame(k, acc, children)

    def first_dive(self) -> List[int]:
        """Option ranks of the first leaf run() reaches: the cheapest child at every depth"""
        kernel, state = self.kernel, self.state
        ranks: List[int] = []
        tokens = []
        for k in range(len(kernel)):
            _, _, rank, placement = self._expand(k, 0.0).children[0]
            tokens.append(kernel.commit(state, placement))
            ranks.append(rank)
        for token in reversed(tokens):
            kernel.undo(state, token)
        return ranks

    def run(self):
        """Returns (option ranks, incumbent, trace, optimal, lower bound)"""
        n = len(self.kernel)
        if n == 0:
            return [], 0.0, [(0, 0.0)], True, 0.0

        kernel, state = self.kernel, self.state
        incumbent = math.inf
        best: Optional[List[int]] = None
        choices = [0] * n
        trace: List[Tuple[int, float]] = []
        stack = [self._expand(0, 0.0)]
        nodes = 1
        pending_bound = None

        while stack:
            frame = stack[-1]
            if frame.token is not None:
                kernel.undo(state, frame.token)
                frame.token = None
            if frame.cursor >= len(frame.children):
                stack.pop()
                continue

            cost, _, rank, placement = frame.children[frame.cursor]
            acc = frame.acc + cost
            if acc + self.suffix[frame.k + 1] >= incumbent - PRUNE_TOLERANCE:
                # children are sorted, so the rest of this frame is bounded out too
                frame.cursor = len(frame.children)
                continue
            frame.cursor += 1
            frame.token = kernel.commit(state, placement)
            choices[frame.k] = rank

            if frame.k + 1 == n:
                incumbent = acc
                best = list(choices)
                trace.append((nodes, acc))
                logger.debug(f"Incumbent {acc:.6f} after {nodes} nodes")
                continue
            if self.node_limit is not None and nodes >= self.node_limit and best is not None:
                pending_bound = acc + self.suffix[frame.k + 1]
                break
            nodes += 1
            stack.append(self._expand(frame.k + 1, acc))

        if pending_bound is None:
            return best, incumbent, trace, True, incumbent

        lower_bound = min(incumbent, pending_bound)
        for frame in stack:
            if frame.cursor < len(frame.children):
                cost = frame.children[frame.cursor][0]
                lower_bound = min(lower_bound, frame.acc + cost + self.suffix[frame.k + 1])
        logger.warning(
            f"Branch-and-bound stopped at the node limit ({self.node_limit}); "
            f"incumbent {incumbent:.6f}, lower bound {lower_bound:.6f}"
        )
        return best, incumbent, trace, False, lower_bound


def first_dive_decision(
    evaluator: ObjectiveEvaluator, cfg: ExactConfig
) -> Tuple[Decision, int]:
    """Greedy decision of the branch-and-bound's first dive and the evaluations it took"""
    options = candidate_options(
        evaluator.mode, fraction_grid(evaluator.mode, cfg), len(evaluator.kernel.servers), cfg.rb_choices
    )
    search = BranchAndBound(evaluator, options, None)
    chosen = [options[rank] for rank in search.first_dive()]
    decision = evaluator.to_decision(
        [p for p, _, _ in chosen], [j for _, j, _ in chosen], [rb for _, _, rb in chosen]
    )
    return decision, search.evaluations


def solve_exact(
    tasks: Sequence[Task],
    mode: Mode,
    cfg: ExactConfig,
    model: ProcessingModel,
    radio: RadioConfig,
    servers: Optional[Sequence[ServerSpec]] = None,
    drop_penalty: Optional[DropPenalty] = None,
) -> SolveResult:
    started = time.perf_counter()
    mode = Mode(mode)
    cap = rb_max(radio)
    if max(cfg.rb_choices) > cap:
        raise InvalidArgumentError(
            f"rb_choices {cfg.rb_choices} exceed the cap of {cap} resource blocks"
        )

    evaluator = ObjectiveEvaluator(tasks, mode, model, radio, servers, drop_penalty)
    options = candidate_options(
        mode, fraction_grid(mode, cfg), len(evaluator.kernel.servers), cfg.rb_choices
    )
    search = BranchAndBound(evaluator, options, cfg.node_limit)
    ranks, _, trace, optimal, lower_bound = search.run()

    chosen = [options[rank] for rank in ranks]
    decision = evaluator.to_decision(
        [p for p, _, _ in chosen], [j for _, j, _ in chosen], [rb for _, _, rb in chosen]
    )
    return build_result(
        SolverName.EXACT,
        mode,
        tasks,
        decision,
        model,
        radio,
        servers,
        evaluator.drop_penalty,
        trace,
        search.evaluations,
        started,
        optimal=optimal,
        lower_bound=lower_bound,
    )
