import numpy as np
import pytest

from app.errors import InvalidArgumentError
from app.exact_solver import candidate_options, fraction_grid, solve_exact
from app.models import (
    Decision,
    ExactConfig,
    Mode,
    SolverName,
    TaskDecision,
    WorkloadSpec,
)
from app.objective import assess, evaluate
from app.oracle import OracleInstance, enumerate_optimum, full_options
from app.workload import generate_workload
from tests.conftest import make_task


def random_instance(seed, count=4):
    spec = WorkloadSpec(ue_count=3, arrival_rate_per_s=10.0, max_tasks=count, seed=seed)
    return generate_workload(spec)


class TestGrid:

    def test_fraction_grid_per_mode(self):
        """Modes restrict the p grid"""
        config = ExactConfig(p_grid_step=0.25)
        assert fraction_grid(Mode.LOCAL_ONLY, config) == [1.0]
        assert fraction_grid(Mode.OFFLOAD_ONLY, config) == [0.0]
        assert fraction_grid(Mode.PARTITION, config) == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_options_in_offload_mode(self):
        """An unassigned choice plus every server and RB pair"""
        options = candidate_options(Mode.OFFLOAD_ONLY, [0.0], 2, [50, 100])
        assert options == [(0.0, None, 100), (0.0, 0, 50), (0.0, 0, 100), (0.0, 1, 50), (0.0, 1, 100)]

    def test_fully_local_has_one_option(self):
        """p = 1 needs neither a server nor an RB choice"""
        options = candidate_options(Mode.PARTITION, [0.5, 1.0], 2, [50, 100])
        assert options.count((1.0, None, 100)) == 1
        assert len(options) == 5

    def test_grid_step_must_divide_one(self):
        """1 / step has to be an integer"""
        with pytest.raises(ValueError):
            ExactConfig(p_grid_step=0.3)


class TestSolveExact:

    def test_single_task_matches_grid_minimum(self, model, radio, one_server):
        """The optimum is the best grid point of the one-task objective"""
        tasks = [make_task(0, 8e6, 0.0, 1.0)]
        config = ExactConfig(p_grid_step=0.05, rb_choices=[50, 100], node_limit=None)
        result = solve_exact(tasks, Mode.PARTITION, config, model, radio, one_server)

        best = float("inf")
        for p in fraction_grid(Mode.PARTITION, config):
            for rb in config.rb_choices:
                server = None if p == 1.0 else 1
                decision = Decision(
                    items=(TaskDecision(task_id=0, local_fraction=p, server=server, rb_count=rb),)
                )
                value = evaluate(tasks, decision, Mode.PARTITION, model, radio, one_server)
                if value.feasible:
                    best = min(best, value.total)
        assert result.best_value.total == pytest.approx(best, rel=1e-9)
        assert result.optimal is True
        assert result.solver == SolverName.EXACT

    def test_idle_fast_mec_offloads_everything(self, model, radio, two_servers):
        """Spread-out tasks that are cheaper on the MEC go there whole"""
        tasks = [make_task(i, 2e6, float(i), float(i) + 2.0, ue_id=i) for i in range(3)]
        config = ExactConfig(p_grid_step=0.25, rb_choices=[50, 100], node_limit=None)
        result = solve_exact(tasks, Mode.PARTITION, config, model, radio, two_servers)
        assert [item.local_fraction for item in result.best_decision.items] == [0.0, 0.0, 0.0]
        assert all(item.rb_count == 100 for item in result.best_decision.items)

    def test_matches_enumeration_in_partition_mode(self, model, radio, small_tasks):
        """4 tasks, 2 servers, 5 grid points, 2 RB choices"""
        instance = OracleInstance(tasks=small_tasks, mode=Mode.PARTITION, p_grid_step=0.25, rb_choices=[50, 100])
        oracle = enumerate_optimum(instance)
        result = solve_exact(
            small_tasks, Mode.PARTITION, instance.exact_config(), model, radio, instance.servers
        )
        assert result.best_value.total == pytest.approx(oracle.objective, rel=1e-9, abs=1e-9)

    def test_matches_enumeration_in_offload_mode(self, model, radio):
        """Random OffloadOnly instances, drops allowed"""
        for seed in range(15):
            tasks = random_instance(seed)
            instance = OracleInstance(tasks=tasks, mode=Mode.OFFLOAD_ONLY, rb_choices=[10, 100])
            oracle = enumerate_optimum(instance)
            result = solve_exact(
                tasks, Mode.OFFLOAD_ONLY, instance.exact_config(), model, radio, instance.servers
            )
            assert result.best_value.total == pytest.approx(oracle.objective, rel=1e-9, abs=1e-9)

    @pytest.mark.slow
    def test_matches_enumeration_on_fifty_instances(self, model, radio):
        """Partition mode over fifty random small instances"""
        rng = np.random.default_rng(99)
        for seed in range(50):
            tasks = random_instance(seed, count=int(rng.integers(1, 5)))
            instance = OracleInstance(tasks=tasks, mode=Mode.PARTITION, rb_choices=[50, 100])
            oracle = enumerate_optimum(instance)
            result = solve_exact(
                tasks, Mode.PARTITION, instance.exact_config(), model, radio, instance.servers
            )
            assert result.best_value.total == pytest.approx(oracle.objective, rel=1e-9, abs=1e-9)

    def test_partition_never_worse_than_local(self, model, radio, two_servers, small_tasks):
        """All-local is one of the partition points"""
        config = ExactConfig(p_grid_step=0.25, node_limit=None)
        partition = solve_exact(small_tasks, Mode.PARTITION, config, model, radio, two_servers)
        local = solve_exact(small_tasks, Mode.LOCAL_ONLY, config, model, radio, two_servers)
        assert partition.best_value.total <= local.best_value.total + 1e-12

    def test_node_limit_keeps_a_valid_bound(self, model, radio, two_servers):
        """A truncated search still returns a feasible decision under a lower bound"""
        tasks = generate_workload(WorkloadSpec(ue_count=30, arrival_rate_per_s=3.0, max_tasks=30, seed=2))
        config = ExactConfig(p_grid_step=0.25, node_limit=5)
        result = solve_exact(tasks, Mode.PARTITION, config, model, radio, two_servers)
        assert result.best_value.feasible
        assert result.lower_bound <= result.best_value.total + 1e-9
        assessment = assess(tasks, result.best_decision, Mode.PARTITION, model, radio, two_servers)
        assert assessment.violations == []

    def test_trace_records_improvements(self, model, radio, two_servers, small_tasks):
        """Each incumbent improves on the previous one"""
        config = ExactConfig(p_grid_step=0.25, node_limit=None)
        result = solve_exact(small_tasks, Mode.OFFLOAD_ONLY, config, model, radio, two_servers)
        values = [point.best_objective for point in result.trace]
        assert values == sorted(values, reverse=True)
        assert values[-1] == pytest.approx(result.best_value.total)

    def test_empty_instance(self, model, radio):
        """Nothing to decide"""
        result = solve_exact([], Mode.PARTITION, ExactConfig(), model, radio)
        assert result.best_value.total == 0.0
        assert result.best_decision.items == ()

    def test_rb_choice_over_cap(self, model, radio, small_tasks):
        """RB choices cannot exceed the radio budget"""
        with pytest.raises(InvalidArgumentError):
            solve_exact(small_tasks, Mode.PARTITION, ExactConfig(rb_choices=[50, 120]), model, radio)


class TestOracle:

    def test_lists_every_server_and_rb(self):
        """Fully local and unassigned choices are enumerated like any other"""
        options = full_options(Mode.PARTITION, 0.25, 2, [50, 100])
        assert len(options) == 5 * 3 * 2
        assert (1.0, 0, 50) in options
        assert (0.5, None, 100) in options
        assert full_options(Mode.OFFLOAD_ONLY, 0.25, 2, [50, 100]) == [
            (0.0, None, 50),
            (0.0, None, 100),
            (0.0, 0, 50),
            (0.0, 0, 100),
            (0.0, 1, 50),
            (0.0, 1, 100),
        ]

    def test_optimum_agrees_with_the_simulator(self, model, radio, small_tasks):
        """The reported optimum is the full simulator's value of the returned decision"""
        instance = OracleInstance(tasks=small_tasks[:3], mode=Mode.PARTITION)
        oracle = enumerate_optimum(instance)
        assert oracle.leaves == 30 ** 3
        assessment = assess(small_tasks[:3], oracle.decision, Mode.PARTITION, model, radio, instance.servers)
        assert assessment.violations == []
        assert assessment.value.total == oracle.objective

    def test_hopeless_partition_instance(self, model, radio):
        """Only fully local decisions survive when no portion can meet its deadline"""
        tasks = [make_task(0, 2e6, 0.0, 0.001)]
        oracle = enumerate_optimum(OracleInstance(tasks=tasks, mode=Mode.PARTITION))
        assert oracle.decision.items[0].local_fraction == 1.0
        assert oracle.objective == pytest.approx(2e6 / model.local_rate_bits_per_s)

    def test_too_many_leaves(self):
        """Instances beyond the cap are refused"""
        tasks = [make_task(i, 1e6, 0.1 * i, 5.0) for i in range(6)]
        with pytest.raises(InvalidArgumentError):
            enumerate_optimum(OracleInstance(tasks=tasks, mode=Mode.PARTITION))
