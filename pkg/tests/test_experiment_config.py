import os

import pytest

from app.errors import ConfigParseError
from app.experiment_config import load_experiment_config, parse_experiment_config
from app.models import DropPenalty, Mode, SolverName

DEFAULT_ENV = os.path.join(os.path.dirname(os.path.dirname(__file__)), "configs", "default.env")


class TestParseExperimentConfig:

    def test_default_file(self):
        """The shipped config reproduces the built-in defaults"""
        config = load_experiment_config(DEFAULT_ENV)
        assert config.ue_counts == [50, 100, 200, 400]
        assert config.modes == [Mode.OFFLOAD_ONLY, Mode.PARTITION]
        assert config.solvers == [SolverName.EXACT, SolverName.CUCKOO]
        assert config.radio.noise_power_w == pytest.approx(1e-13)
        assert [server.id for server in config.servers] == [1, 2]
        assert config.workload.size_classes == [(5e5, 0.3), (2e6, 0.4), (8e6, 0.3)]
        assert config.workload.deadline_slack == (0.5, 2.0)
        assert config.exact.node_limit == 10000
        assert config.seed == 2024
        assert config.drop_penalty == DropPenalty.PER_TASK

    def test_empty_text_uses_defaults(self):
        """Every key is optional"""
        config = parse_experiment_config("")
        assert config.runs_per_point == 10
        assert config.cuckoo.nest_count == 25

    def test_comments_and_sections(self):
        """Servers, cuckoo and exact keys land in their sections"""
        text = "\n".join(
            [
                "# small sweep",
                "server_count = 3",
                "cpus_per_server = 2",
                "cuckoo_iterations = 12",
                "exact_node_limit = none",
                "modes = local_only",
            ]
        )
        config = parse_experiment_config(text)
        assert [server.id for server in config.servers] == [1, 2, 3]
        assert all(server.cpu_count == 2 for server in config.servers)
        assert config.cuckoo.iterations == 12
        assert config.exact.node_limit is None
        assert config.modes == [Mode.LOCAL_ONLY]

    def test_unknown_key_names_field_and_line(self):
        """Typos are reported where they are"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("seed = 1\n\nue_count = 5\n", source="sweep.env")
        assert info.value.field == "ue_count"
        assert info.value.line == 3
        assert "sweep.env:3" in str(info.value)

    def test_unparseable_value(self):
        """Values that cannot be converted name their line"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("runs_per_point = 2\nseed = abc\n")
        assert info.value.field == "seed"
        assert info.value.line == 2

    def test_empty_value(self):
        """A key needs a value"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("output_dir =\n")
        assert info.value.field == "output_dir"

    def test_model_validation_maps_back_to_the_key(self):
        """Range errors from the models point at the config key"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("seed = 1\ncuckoo_abandonment_prob = 1.5\n")
        assert info.value.field == "cuckoo_abandonment_prob"
        assert info.value.line == 2

    def test_server_field_validation(self):
        """Per-server fields map back to their shared key"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("cpus_per_server = 0\n")
        assert info.value.field == "cpus_per_server"
        assert info.value.line == 1

    def test_unknown_mode(self):
        """Mode names are checked"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("modes = partition,hybrid\n")
        assert info.value.field == "modes"

    def test_overrides_win(self):
        """Command-line values replace file values; None means unset"""
        config = parse_experiment_config(
            "seed = 1\nruns_per_point = 4\n",
            overrides={"seed": "9", "runs_per_point": None, "ue_counts": "5,10"},
        )
        assert config.seed == 9
        assert config.runs_per_point == 4
        assert config.ue_counts == [5, 10]

    def test_error_dict(self):
        """Structured form for the CLI"""
        with pytest.raises(ConfigParseError) as info:
            parse_experiment_config("bogus = 1\n")
        assert info.value.to_dict() == {
            "type": "ConfigParseError",
            "message": "unknown key 'bogus'",
            "field": "bogus",
            "line": 1,
        }
