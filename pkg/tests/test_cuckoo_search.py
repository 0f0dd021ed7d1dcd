import math

import numpy as np
import pytest

from app.cuckoo_search import NestCodec, levy_steps, mantegna_sigma, solve_cuckoo
from app.exact_solver import first_dive_decision, solve_exact
from app.models import CuckooConfig, ExactConfig, Mode, WorkloadSpec, WorkloadTemplate
from app.objective import ObjectiveEvaluator, assess
from app.scheduler import ScheduleKernel, utilization
from app.workload import generate_workload
from tests.conftest import make_task

FAST = CuckooConfig(nest_count=10, iterations=30)


class TestLevySteps:

    def test_mantegna_sigma_for_one_and_a_half(self):
        """Reference value of the Mantegna scale for lambda = 1.5"""
        assert mantegna_sigma(1.5) == pytest.approx(0.69657, rel=1e-5)

    def test_steps_are_seeded(self):
        """Same generator state, same steps"""
        first = levy_steps(np.random.default_rng(1), (4, 6), 1.5)
        second = levy_steps(np.random.default_rng(1), (4, 6), 1.5)
        assert first.shape == (4, 6)
        assert np.array_equal(first, second)


class TestNestCodec:

    def test_decode_rounds_and_clamps(self, model, radio, two_servers):
        """Server coordinates below 1 are unassigned, the rest round to a server"""
        tasks = [make_task(i, 1e6, 0.1 * i, 5.0) for i in range(3)]
        codec = NestCodec(ScheduleKernel(tasks, model, radio, two_servers), Mode.PARTITION)
        x = np.array([0.2, 1.0, 0.5, 0.7, 1.6, 2.0, 1.2, 37.4, 100.0])
        fractions, servers, rbs = codec.decode(x)
        assert fractions == [0.2, 1.0, 0.5]
        assert servers == [None, None, 1]
        assert rbs == [1, 37, 100]

    def test_mode_fixes_the_fraction(self, model, radio, two_servers):
        """OffloadOnly decodes p = 0 whatever the coordinate"""
        tasks = [make_task(0, 1e6, 0.0, 5.0)]
        codec = NestCodec(ScheduleKernel(tasks, model, radio, two_servers), Mode.OFFLOAD_ONLY)
        fractions, servers, _ = codec.decode(np.array([0.9, 1.2, 50.0]))
        assert fractions == [0.0]
        assert servers == [0]

    def test_fresh_nests_name_a_server(self, model, radio, two_servers, small_tasks):
        """Random nests start inside the assigned region of the server coordinate"""
        codec = NestCodec(ScheduleKernel(small_tasks, model, radio, two_servers), Mode.PARTITION)
        nests = codec.random(np.random.default_rng(0), 50)
        n = len(small_tasks)
        assert (nests[:, n : 2 * n] >= 1.0).all()
        assert (nests[:, 2 * n :] <= 100).all()


class TestSolveCuckoo:

    def test_same_seed_same_result(self, model, radio, two_servers, small_tasks):
        """A fixed seed makes the search reproducible"""
        first = solve_cuckoo(small_tasks, Mode.PARTITION, FAST, model, radio, two_servers)
        second = solve_cuckoo(small_tasks, Mode.PARTITION, FAST, model, radio, two_servers)
        assert first.best_decision == second.best_decision
        assert first.trace == second.trace
        assert first.evaluations == second.evaluations

    def test_trace_never_increases(self, model, radio, two_servers):
        """The best nest is never lost"""
        tasks = generate_workload(WorkloadSpec(ue_count=20, arrival_rate_per_s=4.0, max_tasks=40, seed=3))
        result = solve_cuckoo(tasks, Mode.OFFLOAD_ONLY, FAST, model, radio, two_servers)
        values = [point.best_objective for point in result.trace]
        assert len(values) == FAST.iterations + 1
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_partition_result_is_feasible(self, model, radio, two_servers):
        """The all-local nest keeps Partition mode feasible from the start"""
        tasks = generate_workload(WorkloadSpec(ue_count=20, arrival_rate_per_s=4.0, max_tasks=40, seed=8))
        result = solve_cuckoo(tasks, Mode.PARTITION, FAST, model, radio, two_servers)
        assert math.isfinite(result.trace[0].best_objective)
        assessment = assess(tasks, result.best_decision, Mode.PARTITION, model, radio, two_servers)
        assert assessment.violations == []
        assert assessment.outcome.drop_count == 0

    def test_seeded_optimum_is_kept(self, model, radio, two_servers):
        """Without abandonment a nest started at the optimum holds the trace flat"""
        tasks = [make_task(0, 2e6, 0.0, 2.0)]
        exact = solve_exact(
            tasks, Mode.PARTITION, ExactConfig(p_grid_step=0.05, node_limit=None), model, radio, two_servers
        )
        config = CuckooConfig(nest_count=5, iterations=20, abandonment_prob=0.0)
        result = solve_cuckoo(
            tasks,
            Mode.PARTITION,
            config,
            model,
            radio,
            two_servers,
            initial_decisions=[exact.best_decision],
        )
        values = [point.best_objective for point in result.trace]
        assert values[0] <= exact.best_value.total + 1e-12
        assert len(set(values)) == 1

    def test_never_beats_exact_on_small_instances(self, model, radio, two_servers):
        """In OffloadOnly both solvers search the same integer decisions"""
        for seed in range(6):
            spec = WorkloadSpec(ue_count=3, arrival_rate_per_s=10.0, max_tasks=2, seed=seed)
            tasks = generate_workload(spec)
            exact = solve_exact(
                tasks,
                Mode.OFFLOAD_ONLY,
                ExactConfig(rb_choices=list(range(1, 101)), node_limit=None),
                model,
                radio,
                two_servers,
            )
            config = FAST.model_copy(update={"seed": seed})
            cuckoo = solve_cuckoo(tasks, Mode.OFFLOAD_ONLY, config, model, radio, two_servers)
            assert cuckoo.best_value.total >= exact.best_value.total - 1e-9

    def test_empty_instance(self, model, radio):
        """No tasks, zero objective"""
        result = solve_cuckoo([], Mode.PARTITION, FAST, model, radio)
        assert result.best_value.total == 0.0

    def test_starts_from_the_first_dive(self, model, radio, two_servers):
        """The greedy dive of branch-and-bound bounds the first trace point"""
        tasks = generate_workload(WorkloadSpec(ue_count=20, arrival_rate_per_s=8.0, max_tasks=40, seed=5))
        evaluator = ObjectiveEvaluator(tasks, Mode.PARTITION, model, radio, two_servers)
        dive, _ = first_dive_decision(evaluator, ExactConfig(rb_choices=[100]))
        dive_value = assess(tasks, dive, Mode.PARTITION, model, radio, two_servers).value
        result = solve_cuckoo(tasks, Mode.PARTITION, FAST, model, radio, two_servers)
        assert dive_value.feasible
        assert result.trace[0].best_objective <= dive_value.total + 1e-9
        assert result.best_value.total <= dive_value.total + 1e-9

    def test_partition_offloads_under_load(self, model, radio, two_servers):
        """Partition mode moves work to the servers instead of staying all-local"""
        tasks = generate_workload(WorkloadSpec(ue_count=20, arrival_rate_per_s=8.0, max_tasks=40, seed=5))
        result = solve_cuckoo(tasks, Mode.PARTITION, FAST, model, radio, two_servers)
        offloaded = [item for item in result.best_decision.items if item.local_fraction < 1.0]
        assert len(offloaded) >= len(tasks) // 4
        assert all(item.server is not None for item in offloaded)


@pytest.mark.slow
class TestAgainstExact:

    def test_fifty_small_partition_instances(self, model, radio, two_servers):
        """Within 20% of branch-and-bound in at least 45 of 50 runs, traces monotone"""
        rng = np.random.default_rng(99)
        close = 0
        for seed in range(50):
            size = int(rng.integers(1, 5))
            spec = WorkloadSpec(ue_count=3, arrival_rate_per_s=10.0, max_tasks=size, seed=seed)
            tasks = generate_workload(spec)
            exact = solve_exact(
                tasks,
                Mode.PARTITION,
                ExactConfig(p_grid_step=0.25, rb_choices=[50, 100], node_limit=None),
                model,
                radio,
                two_servers,
            )
            cuckoo = solve_cuckoo(
                tasks, Mode.PARTITION, CuckooConfig(seed=seed), model, radio, two_servers
            )
            values = [point.best_objective for point in cuckoo.trace]
            assert all(b <= a for a, b in zip(values, values[1:]))
            assert cuckoo.best_value.feasible
            if abs(cuckoo.best_value.total - exact.best_value.total) <= 0.2 * exact.best_value.total:
                close += 1
        assert close >= 45


@pytest.mark.slow
class TestFullLoad:

    @pytest.fixture(scope="class")
    def tasks(self):
        return generate_workload(WorkloadTemplate().spec_for(400, 2024))

    def test_partition_uses_the_servers(self, tasks, model, radio, two_servers):
        """At 400 UEs a real share of the work is offloaded and the servers are the busier side"""
        result = solve_cuckoo(tasks, Mode.PARTITION, CuckooConfig(), model, radio, two_servers)
        offloaded = [item for item in result.best_decision.items if item.local_fraction < 1.0]
        assert len(offloaded) >= len(tasks) // 10

        outcome = assess(tasks, result.best_decision, Mode.PARTITION, model, radio, two_servers).outcome
        assert outcome.drop_count == 0
        mec_util, local_util = utilization(outcome, max(10.0, outcome.last_completion_s))
        assert mec_util > local_util

    def test_partition_beats_offload_only(self, tasks, model, radio, two_servers):
        """Same instance, Partition objective at least 5% under OffloadOnly"""
        partition = solve_cuckoo(tasks, Mode.PARTITION, CuckooConfig(), model, radio, two_servers)
        offload = solve_cuckoo(tasks, Mode.OFFLOAD_ONLY, CuckooConfig(), model, radio, two_servers)
        assert partition.best_value.total <= 0.95 * offload.best_value.total

    def test_desk_scale_runtime(self, tasks, model, radio, two_servers):
        """25 nests and 100 iterations on 400 tasks within a minute"""
        result = solve_cuckoo(tasks, Mode.PARTITION, CuckooConfig(), model, radio, two_servers)
        assert len(result.trace) == 101
        assert result.wall_time_s < 60.0
