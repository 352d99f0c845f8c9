from .config import GpConfig
from .population import (
	Individual,
	crossover,
	fitness,
	hoist_mutation,
	init_population,
	is_valid,
	mse,
	point_mutation,
	random_tree,
	subtree_mutation,
	tournament_select,
)
from .pareto import FrontEntry, ParetoFront
from .constants import optimize_constants
from .evolve import EvolutionResult, GenerationStats, evolve, write_generation_log
