import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from convergence_de.core import (
    Budget,
    Individual,
    Population,
    Problem,
    RngStream,
    best_index,
    best_individual,
    clamp_to_bounds,
    evaluate,
    evaluate_batch,
    init_population,
)
from convergence_de.errors import BudgetExhausted, ConfigurationError
from convergence_de.state import RunState

from conftest import sphere_objective


class TestProblem:
    def test_sphere_with_bias_at_origin(self):
        problem = Problem(name="s", dimension=2, objective=sphere_objective, bias=-1400.0)
        assert problem.value(np.zeros(2)) == -1400.0

    def test_sphere_without_bias(self, sphere2):
        assert sphere2.value(np.zeros(2)) == 0.0
        assert sphere2.value(np.array([3.0, 4.0])) == 25.0

    def test_objective_is_deterministic(self, sphere2):
        x = np.array([1.5, -2.5])
        assert sphere2.value(x) == sphere2.value(x.copy())

    def test_bounds_are_broadcast_and_read_only(self, sphere2):
        assert_array_equal(sphere2.lower_bound, [-100.0, -100.0])
        assert_array_equal(sphere2.upper_bound, [100.0, 100.0])
        with pytest.raises(ValueError):
            sphere2.lower_bound[0] = 0.0

    def test_inverted_bounds_rejected(self):
        with pytest.raises(ConfigurationError):
            Problem(name="bad", dimension=2, objective=sphere_objective, lower_bound=1.0, upper_bound=-1.0)


class TestClamp:
    @pytest.mark.parametrize("genome, expected", [
        ([150.0, -150.0], [100.0, -100.0]),
        ([0.0, 0.0], [0.0, 0.0]),
        ([100.0001, 50.0], [100.0, 50.0]),
    ])
    def test_projection(self, sphere2, genome, expected):
        assert_array_equal(clamp_to_bounds(np.array(genome), sphere2), expected)

    def test_idempotent(self, sphere2):
        genomes = np.array([[250.0, -3.0], [-101.0, 99.0]])
        once = clamp_to_bounds(genomes, sphere2)
        assert_array_equal(clamp_to_bounds(once, sphere2), once)

    def test_wrong_length(self, sphere2):
        with pytest.raises(ValueError):
            clamp_to_bounds(np.zeros(3), sphere2)


class TestBestIndex:
    @pytest.mark.parametrize("fitness, expected", [
        ([3.0, 1.0, 2.0], 1),
        ([1.0, 1.0], 0),
        ([7.0], 0),
    ])
    def test_examples(self, fitness, expected):
        assert best_index(np.array(fitness)) == expected

    def test_empty(self):
        with pytest.raises(ValueError):
            best_index(np.array([]))

    def test_best_individual(self):
        pop = Population(genomes=np.array([[1.0, 1.0], [0.0, 0.0]]), fitness=np.array([2.0, 0.0]))
        best = best_individual(pop)
        assert best.fitness == 0.0
        assert_array_equal(best.genome, [0.0, 0.0])


class TestRngStream:
    def test_same_seed_same_draws(self):
        a, b = RngStream(7), RngStream(7)
        assert_array_equal(a.uniform(size=5), b.uniform(size=5))
        assert_array_equal(a.normal(size=5), b.normal(size=5))

    def test_children_are_independent_of_parent_use(self):
        parent = RngStream(7)
        first = parent.child(1).uniform(size=3)
        parent.uniform(size=100)
        assert_array_equal(parent.child(1).uniform(size=3), first)

    def test_children_differ(self):
        assert not np.array_equal(RngStream(7).child(0).uniform(size=3), RngStream(7).child(1).uniform(size=3))


class TestPopulation:
    def test_members_round_trip(self):
        members = [Individual(np.array([1.0, 2.0]), 3.0), Individual(np.array([0.0, 0.0]), 1.0)]
        pop = Population.from_members(members)
        assert pop.size == 2
        assert pop.evaluated
        assert pop[1].fitness == 1.0

    def test_unevaluated_by_default(self):
        assert not Population(genomes=np.zeros((3, 2))).evaluated

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            Population(genomes=np.zeros((3, 2)), fitness=np.zeros(2))


class TestInitPopulation:
    def test_size_and_bounds(self, sphere2):
        state = RunState(sphere2, Budget(100), seed=0)
        pop = init_population(sphere2, 4, RngStream(0), state)
        assert pop.size == 4
        assert pop.evaluated
        assert np.all(np.abs(pop.genomes) <= 100.0)
        assert state.used == 4

    def test_single_member(self, sphere2):
        pop = init_population(sphere2, 1, RngStream(0), RunState(sphere2, Budget(10), seed=0))
        assert pop.size == 1
        assert pop.evaluated

    def test_uniform_mean(self, sphere2):
        pop = init_population(sphere2, 1000, RngStream(42), RunState(sphere2, Budget(1000), seed=42))
        tolerance = 3 * (200 / math.sqrt(12)) / math.sqrt(2000)
        assert abs(pop.genomes.mean()) < tolerance

    def test_budget_too_small(self, sphere2):
        state = RunState(sphere2, Budget(3), seed=0)
        with pytest.raises(BudgetExhausted):
            init_population(sphere2, 4, RngStream(0), state)
        assert state.used == 3


class TestBudget:
    def test_evaluate_charges_one(self, sphere2):
        budget = Budget(2)
        assert evaluate(sphere2, np.array([3.0, 4.0]), budget) == 25.0
        assert budget.used == 1

    def test_exhausted_raises(self, sphere2):
        budget = Budget(1)
        evaluate(sphere2, np.zeros(2), budget)
        with pytest.raises(BudgetExhausted):
            evaluate(sphere2, np.zeros(2), budget)
        assert budget.used == 1

    def test_batch_is_truncated(self, sphere2):
        budget = Budget(3)
        values = evaluate_batch(sphere2, np.ones((5, 2)), budget)
        assert len(values) == 3
        assert budget.used == 3

    def test_invalid_budget(self):
        with pytest.raises(ConfigurationError):
            Budget(0)


class TestRunState:
    def test_partial_batch_counts_toward_best(self, sphere2):
        state = RunState(sphere2, Budget(2), seed=0)
        genomes = np.array([[5.0, 5.0], [1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(BudgetExhausted):
            state.evaluate(genomes)
        assert state.best_fitness == 1.0
        assert state.used == 2

    def test_best_keeps_earliest_on_ties(self, sphere2):
        state = RunState(sphere2, Budget(10), seed=0)
        state.evaluate(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert_array_equal(state.best_genome, [1.0, 0.0])

    def test_history_is_deduplicated(self, sphere2):
        state = RunState(sphere2, Budget(10), seed=0)
        state.evaluate(np.array([[2.0, 0.0]]))
        state.record()
        state.record()
        state.evaluate(np.array([[1.0, 0.0]]))
        record = state.finish()
        assert record.history == [(1, 4.0), (2, 1.0)]
        assert record.evaluations_used == 2
        assert record.status == "completed"

    def test_before_evaluate_callbacks_run(self, sphere2):
        seen = []
        state = RunState(sphere2, Budget(10), seed=0, before_evaluate=[lambda p, g: seen.append(len(g))])
        state.evaluate(np.zeros((3, 2)))
        assert seen == [3]

    def test_to_row(self, sphere2):
        state = RunState(sphere2, Budget(10), seed=5)
        state.evaluate(np.array([[3.0, 4.0]]))
        row = state.finish().to_row("DE", "f1", 2)
        assert row == {"algorithm": "DE", "function": "f1", "dimension": 2, "seed": 5, "evaluations": 1, "best_fitness": 25.0}
