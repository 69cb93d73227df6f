from convergence_de.optimizers.differential import run_de
from convergence_de.optimizers.evolution_strategy import run_es
from convergence_de.optimizers.genetic import run_ga
from convergence_de.optimizers.particle_swarm import run_pso
from convergence_de.optimizers.random_search import run_rs

__all__ = ["run_de", "run_es", "run_ga", "run_pso", "run_rs"]
