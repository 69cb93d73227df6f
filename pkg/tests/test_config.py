import pytest
import yaml

from convergence_de.config import (
    AcceleratedConfig,
    ExperimentConfig,
    OptimizerConfig,
    default_algorithms,
    load_config,
    make_algorithm_config,
    parse_config,
)
from convergence_de.errors import ConfigurationError


class TestAlgorithmConfig:
    def test_empty_de_block(self):
        config = make_algorithm_config("DE", {})
        assert isinstance(config, OptimizerConfig)
        assert config.de_scale_factor == 0.7
        assert config.de_crossover_rate == 0.9
        assert config.de_strategy == "current_to_best_1"

    def test_population_resolves_to_fifty_per_dimension(self):
        assert OptimizerConfig().resolved_population_size(10) == 500
        assert OptimizerConfig(population_size=12).resolved_population_size(10) == 12

    def test_accelerated_block(self):
        config = make_algorithm_config("P2", None)
        assert isinstance(config, AcceleratedConfig)
        assert config.variant == "P2"

    def test_label_with_explicit_algorithm(self):
        config = make_algorithm_config("DE-rand", {"algorithm": "DE", "de_strategy": "rand_1"})
        assert config.algorithm == "DE"
        assert config.de_strategy == "rand_1"

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigurationError, match="unknown algorithm"):
            make_algorithm_config("CMAES", None)

    def test_unknown_key_names_path(self):
        with pytest.raises(ConfigurationError, match="algorithms.DE.de_scale"):
            make_algorithm_config("DE", {"de_scale": 0.5})

    def test_range_error(self):
        with pytest.raises(ConfigurationError, match="de_crossover_rate"):
            make_algorithm_config("DE", {"de_crossover_rate": 1.5})

    def test_default_columns(self):
        assert list(default_algorithms()) == ["RS", "GA", "DE", "ES", "PSO", "P1", "P2", "DE-best1"]
        assert default_algorithms()["DE-best1"].de_strategy == "best_1"


class TestExperimentConfig:
    def test_defaults(self):
        config = parse_config({})
        assert config.dimensions == [2, 10, 30]
        assert config.trials == 30
        assert len(config.functions) == 20
        assert config.budget(10) == 10_000

    def test_none_is_defaults(self):
        assert parse_config(None) == ExperimentConfig()

    def test_negative_trials(self):
        with pytest.raises(ConfigurationError, match="trials"):
            parse_config({"trials": -1})

    def test_unknown_function(self):
        with pytest.raises(ConfigurationError, match="f42"):
            parse_config({"functions": ["f1", "f42"]})

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="dimension"):
            parse_config({"dimension": [2]})

    def test_not_a_mapping(self):
        with pytest.raises(ConfigurationError):
            parse_config([1, 2])

    def test_algorithm_blocks(self):
        config = parse_config({"algorithms": {"DE": None, "P1": {"sigma": 2.5}}})
        assert list(config.algorithms) == ["DE", "P1"]
        assert config.algorithms["P1"].sigma == 2.5
        assert isinstance(config.algorithms["P1"], AcceleratedConfig)

    def test_yaml_round_trip(self):
        config = parse_config({"dimensions": [2], "trials": 3, "algorithms": {"DE": {}, "P2": {"was_mode": "literal"}}})
        again = parse_config(yaml.safe_load(config.to_yaml()))
        assert again == config
        assert again.algorithms["P2"].was_mode == "literal"


class TestLoadConfig:
    def test_load(self, tmp_path):
        path = tmp_path / "experiment.yaml"
        path.write_text("dimensions: [2]\ntrials: 5\nfunctions: [f1, f2]\nalgorithms:\n  DE: {}\n  P1: {sigma: 4}\n")
        config = load_config(path)
        assert config.dimensions == [2]
        assert config.functions == ["f1", "f2"]
        assert config.algorithms["P1"].sigma == 4.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "missing.yaml")

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("dimensions: [2\n")
        with pytest.raises(ConfigurationError, match="Cannot parse"):
            load_config(path)
