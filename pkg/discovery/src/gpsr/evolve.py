import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import NamedTuple

import numpy as np

from shared.logger import logger
from .config import GpConfig
from .constants import optimize_constants
from .pareto import ParetoFront
from .population import (
	Individual,
	crossover,
	evaluate_individual,
	hoist_mutation,
	init_population,
	point_mutation,
	subtree_mutation,
	tournament_select,
	vary,
)
from ..exceptions import DimensionError
from ..exprcore import Expression


class GenerationStats(NamedTuple):
	generation: int
	best_loss: float
	mean_loss: float
	best_complexity: int


class EvolutionResult(NamedTuple):
	best: Expression
	front: ParetoFront
	log: list[GenerationStats]


class _Island:
	"""One population with its own random stream."""

	def __init__(self, cfg: GpConfig, inputs: np.ndarray, target: np.ndarray, seed: np.random.SeedSequence):
		self.cfg = cfg
		self.inputs = inputs
		self.target = target
		self.n_vars = inputs.shape[1]
		self.rng = np.random.default_rng(seed)
		self.population: list[Individual] = []
		self.refined: set[Expression] = set()

	def evaluate(self, expr: Expression) -> Individual:
		return evaluate_individual(expr, self.inputs, self.target, self.cfg)

	def initialize(self) -> list[Individual]:
		self.population = [self.evaluate(expr) for expr in init_population(self.cfg, self.n_vars, self.rng)]
		self.refine()
		return self.population

	def elite(self) -> Individual:
		return min(enumerate(self.population), key=lambda item: (item[1].loss, item[1].complexity, item[0]))[1]

	def offspring(self) -> Individual:
		cfg, rng = self.cfg, self.rng
		parent = tournament_select(self.population, cfg.tournament_size, rng)
		draw = rng.random()
		thresholds = np.cumsum([cfg.p_crossover, cfg.p_subtree_mutation, cfg.p_hoist_mutation, cfg.p_point_mutation])
		if draw < thresholds[0]:
			donor = tournament_select(self.population, cfg.tournament_size, rng)
			child = vary(parent.expr, lambda: crossover(parent.expr, donor.expr, rng), cfg)
		elif draw < thresholds[1]:
			child = vary(parent.expr, lambda: subtree_mutation(parent.expr, cfg, self.n_vars, rng), cfg)
		elif draw < thresholds[2]:
			child = vary(parent.expr, lambda: hoist_mutation(parent.expr, rng), cfg)
		elif draw < thresholds[3]:
			child = vary(parent.expr, lambda: point_mutation(parent.expr, cfg, self.n_vars, rng), cfg)
		else:
			return parent
		if child is parent.expr:
			return parent
		return self.evaluate(child)

	def step(self) -> list[Individual]:
		elite = self.elite()
		self.population = [elite] + [self.offspring() for _ in range(self.cfg.population_size - 1)]
		self.refine()
		return self.population

	def refine(self):
		"""Optimize the constants of the best not yet refined individual of every complexity."""
		if not self.cfg.optimize_constants:
			return
		candidates: dict[int, int] = {}
		for i, individual in enumerate(self.population):
			if individual.expr in self.refined or not np.isfinite(individual.loss):
				continue
			best = candidates.get(individual.complexity)
			if best is None or individual.loss < self.population[best].loss:
				candidates[individual.complexity] = i
		for i in sorted(candidates.values()):
			expr = self.population[i].expr
			self.refined.add(expr)
			improved = optimize_constants(expr, self.inputs, self.target, self.cfg.constant_iters)
			if improved is not expr:
				self.refined.add(improved)
				self.population[i] = self.evaluate(improved)

	def receive(self, migrants: list[Individual]):
		if not migrants:
			return
		order = sorted(range(len(self.population)), key=lambda i: (self.population[i].fitness, i))
		for slot, migrant in zip(order[::-1], migrants):
			self.population[slot] = migrant

	def emigrants(self, n: int) -> list[Individual]:
		order = sorted(range(len(self.population)), key=lambda i: (self.population[i].fitness, i))
		return [self.population[i] for i in order[:n]]


def _sample_rows(n_rows: int, n_samples: int | None) -> np.ndarray:
	if n_samples is None or n_samples >= n_rows:
		return np.arange(n_rows)
	return np.unique(np.linspace(0, n_rows - 1, n_samples).round().astype(int))


def evolve(cfg: GpConfig, inputs, target) -> EvolutionResult:
	"""
	Run genetic-programming symbolic regression on one target.

	Islands evolve in lock step on worker threads, each with its own seed spawned from
	cfg.seed; the front is updated and migrants exchanged in island order after every
	generation, so the result only depends on configuration and data. The search stops
	early once the best raw MSE reaches stopping_criteria.

	Args:
	    cfg (GpConfig): run configuration
	    inputs (array-like): one row per sample, one column per variable
	    target (array-like): value to regress per sample

	Returns:
	    EvolutionResult: selected expression, Pareto front over all evaluated
	        individuals and one GenerationStats row per generation
	"""
	inputs = np.asarray(inputs, dtype=float)
	target = np.asarray(target, dtype=float).reshape(-1)
	if inputs.ndim != 2 or inputs.shape[0] != target.size:
		raise DimensionError('inputs rows must match the target length', target.size, inputs.shape[0])
	rows = _sample_rows(target.size, cfg.n_samples)
	inputs, target = inputs[rows], target[rows]

	seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_populations)
	islands = [_Island(cfg, inputs, target, seed) for seed in seeds]
	front = ParetoFront()
	log: list[GenerationStats] = []

	def record(generation: int, populations: list[list[Individual]]) -> float:
		everyone = [individual for population in populations for individual in population]
		for individual in everyone:
			front.insert(individual.expr, individual.loss, individual.complexity)
		best = min(everyone, key=lambda individual: (individual.loss, individual.complexity))
		finite = [individual.loss for individual in everyone if np.isfinite(individual.loss)]
		mean_loss = float(np.mean(finite)) if finite else np.inf
		log.append(GenerationStats(generation, best.loss, mean_loss, best.complexity))
		return best.loss

	with ThreadPoolExecutor(max_workers=cfg.n_populations) as pool:
		best_loss = record(0, list(pool.map(_Island.initialize, islands)))
		for generation in range(1, cfg.generations + 1):
			if best_loss <= cfg.stopping_criteria:
				break
			populations = list(pool.map(_Island.step, islands))
			if cfg.n_populations > 1 and cfg.n_migrants > 0 and generation % cfg.migration_interval == 0:
				# ring migration from a snapshot so the island order does not matter
				outgoing = [island.emigrants(cfg.n_migrants) for island in islands]
				for i, island in enumerate(islands):
					island.receive(outgoing[i - 1])
				populations = [island.population for island in islands]
			best_loss = record(generation, populations)

	selected = front.select(cfg.model_selection, cfg.parsimony_coefficient)
	if selected is None:
		# every candidate produced non-finite predictions
		best = min((island.elite() for island in islands), key=lambda individual: individual.complexity)
		return EvolutionResult(best.expr, front, log)
	logger.debug(f'GP finished after {len(log) - 1} generations, best loss {best_loss:.3g}, front size {len(front)}')
	return EvolutionResult(selected.expr, front, log)


def write_generation_log(log: list[GenerationStats], path: Path):
	with open(path, 'w', newline='') as f:
		writer = csv.writer(f)
		writer.writerow(GenerationStats._fields)
		for row in log:
			writer.writerow([row.generation, repr(row.best_loss), repr(row.mean_loss), row.best_complexity])
