import json
import os

import pytest

from app.cli import main
from app.models import Mode
from app.oracle import OracleInstance
from app.workload import read_workload
from tests.conftest import make_task

SMALL_CONFIG = """
ue_counts = 4
modes = partition
solvers = baseline,cuckoo
runs_per_point = 1
max_tasks = 6
arrival_rate_per_ue_per_s = 1.0
workload_horizon_s = 5
cuckoo_nest_count = 4
cuckoo_iterations = 4
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.env"
    path.write_text(SMALL_CONFIG)
    return str(path)


def error_payload(stderr):
    line = [entry for entry in stderr.splitlines() if entry.startswith("error: ")][-1]
    return json.loads(line[len("error: "):])


@pytest.mark.integration
class TestRunCommand:

    def test_writes_the_report(self, tmp_path, config_file, capsys):
        """Exit 0 and the summary path on stdout"""
        out = str(tmp_path / "results")
        code = main(["run", config_file, "--out", out, "--workers", "1", "--seed", "11"])
        assert code == 0
        assert f"{out}/summary.csv" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "manifest.json"))
        assert os.path.exists(os.path.join(out, "traces", "4_partition_cuckoo_run0.csv"))

    def test_bad_config_exits_with_two(self, tmp_path, capsys):
        """Parse errors are reported as JSON with field and line"""
        path = tmp_path / "bad.env"
        path.write_text("seed = 1\nnest_count = 3\n")
        code = main(["run", str(path), "--out", str(tmp_path / "results")])
        assert code == 2
        payload = error_payload(capsys.readouterr().err)
        assert payload["field"] == "nest_count"
        assert payload["line"] == 2

    def test_bad_override_exits_with_two(self, tmp_path, config_file, capsys):
        """Command-line overrides go through the same checks"""
        code = main(["run", config_file, "--solvers", "annealing", "--out", str(tmp_path / "r")])
        assert code == 2
        assert error_payload(capsys.readouterr().err)["field"] == "solvers"

    def test_missing_config_exits_with_one(self, tmp_path, capsys):
        """I/O failures are exit status 1"""
        code = main(["run", str(tmp_path / "missing.env")])
        assert code == 1
        assert error_payload(capsys.readouterr().err)["type"] == "FileNotFoundError"


@pytest.mark.integration
class TestReplayCommand:

    def test_replays_into_another_directory(self, tmp_path, config_file, capsys):
        """Same summary from the manifest"""
        first = str(tmp_path / "first")
        second = str(tmp_path / "second")
        assert main(["run", config_file, "--out", first, "--workers", "1"]) == 0
        manifest = os.path.join(first, "manifest.json")
        assert main(["replay", manifest, "--out", second, "--workers", "1"]) == 0
        with open(os.path.join(first, "summary.csv"), "rb") as a, open(
            os.path.join(second, "summary.csv"), "rb"
        ) as b:
            assert a.read() == b.read()


@pytest.mark.integration
class TestOracleCommand:

    def test_compare_with_exact(self, tmp_path, capsys):
        """Enumeration and branch-and-bound agree"""
        instance = OracleInstance(
            tasks=[make_task(0, 2e6, 0.0, 1.0), make_task(1, 8e6, 0.1, 1.5, ue_id=1)],
            mode=Mode.PARTITION,
        )
        path = tmp_path / "instance.json"
        path.write_text(instance.model_dump_json())
        assert main(["oracle", str(path), "--compare"]) == 0
        output = json.loads(capsys.readouterr().out)
        assert output["match"] is True
        assert output["leaves"] == 30 ** 2


@pytest.mark.integration
class TestWorkloadCommand:

    def test_exports_the_run_workload(self, tmp_path, config_file, capsys):
        """The exported tasks are the ones the sweep would solve"""
        out = str(tmp_path / "tasks.jsonl")
        assert main(["workload", config_file, "--ue-count", "4", "--run", "1", "--out", out]) == 0
        tasks = read_workload(out)
        assert 0 < len(tasks) <= 6
        assert f"{len(tasks)} tasks -> {out}" in capsys.readouterr().out
