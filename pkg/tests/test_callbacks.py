import numpy as np
import pytest

from convergence_de.accelerated import run_accelerated_de
from convergence_de.benchmarks import get_problem
from convergence_de.callbacks import EstimateTrace, check_bounds
from convergence_de.config import AcceleratedConfig, OptimizerConfig
from convergence_de.core import Budget, RngStream
from convergence_de.harness import run_optimizer


class TestCheckBounds:
    def test_inside_passes(self, sphere2):
        check_bounds(sphere2, np.array([[100.0, -100.0], [0.0, 0.0]]))

    def test_outside_raises(self, sphere2):
        with pytest.raises(AssertionError, match="outside bounds"):
            check_bounds(sphere2, np.array([[0.0, 0.0], [100.5, 0.0]]))

    @pytest.mark.parametrize("algorithm", ["RS", "GA", "DE", "ES", "PSO", "P1", "P2", "PA"])
    @pytest.mark.parametrize("function", ["f1", "f14"])
    def test_every_optimizer_stays_in_the_box(self, algorithm, function):
        problem = get_problem(function, 2, 0)
        config_type = AcceleratedConfig if algorithm in ("P1", "P2", "PA") else OptimizerConfig
        config = config_type(algorithm=algorithm, population_size=10)
        record = run_optimizer(problem, config, Budget(500), RngStream(2), before_evaluate=[check_bounds])
        assert record.evaluations_used == 500

    def test_neighborhood_random_search_stays_in_the_box(self):
        problem = get_problem("f1", 2, 0)
        config = OptimizerConfig(algorithm="RS", rs_neighborhood=True, rs_neighborhood_sigma=2.0)
        run_optimizer(problem, config, Budget(300), RngStream(0), before_evaluate=[check_bounds])


class TestEstimateTrace:
    def test_rows(self):
        trace = EstimateTrace()
        trace(3, "WAS", np.array([1.0, 2.0, 3.0]), -5.0)
        trace(4, "AS", np.array([0.0, 0.0, 0.0]), None)
        rows = trace.to_rows()
        assert rows[0] == {"generation": 3, "method": "WAS", "fitness": -5.0, "x0": 1.0, "x1": 2.0, "x2": 3.0}
        assert np.isnan(rows[1]["fitness"])

    def test_collects_every_injection(self):
        trace = EstimateTrace()
        config = AcceleratedConfig(algorithm="P2", population_size=10)
        run_accelerated_de(get_problem("f1", 2, 0), config, Budget(500), RngStream(0), on_estimate=trace)
        assert trace.rows
        assert all(row.method == "WAS" for row in trace.rows)
