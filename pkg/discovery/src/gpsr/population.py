from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import GpConfig
from ..exceptions import ConfigError, DiscoveryError
from ..exprcore import (
	Expression,
	NodeKind,
	UNARY_OPS,
	arity,
	complexity,
	evaluate_batch,
	preorder,
	replace_subtree,
	subtree_at,
)


MAX_RETRIES = 10


@dataclass(frozen=True, slots=True)
class Individual:
	expr: Expression
	loss: float
	fitness: float
	complexity: int


def mse(expr: Expression, inputs: np.ndarray, target: np.ndarray) -> float:
	"""Mean squared error, +inf when any prediction is not finite."""
	prediction = evaluate_batch(expr, inputs)
	if not np.all(np.isfinite(prediction)):
		return np.inf
	with np.errstate(over='ignore'):
		loss = float(np.mean((prediction - target) ** 2))
	return loss if np.isfinite(loss) else np.inf


def fitness(expr: Expression, inputs, target, parsimony_coefficient: float) -> float:
	"""
	Penalized loss minimized by the search.

	Args:
	    expr (Expression): candidate
	    inputs (array-like): one row per sample, one column per variable
	    target (array-like): value to regress per sample
	    parsimony_coefficient (float): penalty per tree node

	Returns:
	    float: MSE plus parsimony_coefficient times the node count, +inf for non-finite predictions
	"""
	loss = mse(expr, np.asarray(inputs, dtype=float), np.asarray(target, dtype=float))
	return loss + parsimony_coefficient * complexity(expr)


def evaluate_individual(expr: Expression, inputs: np.ndarray, target: np.ndarray, cfg: GpConfig) -> Individual:
	loss = mse(expr, inputs, target)
	size = complexity(expr)
	return Individual(expr, loss, loss + cfg.parsimony_coefficient * size, size)


def is_valid(expr: Expression, cfg: GpConfig) -> bool:
	"""True when the tree respects max_size and the nested operator constraints."""
	if complexity(expr) > cfg.max_size:
		return False
	if not cfg.nested_constraints:
		return True
	for node in preorder(expr):
		forbidden = cfg.nested_constraints.get(node.op, ())
		if forbidden and any(child.op in forbidden for child in node.children):
			return False
	return True


def _allowed_ops(cfg: GpConfig, parent_op: str | None) -> list[str]:
	forbidden = cfg.nested_constraints.get(parent_op, ()) if parent_op else ()
	return [op for op in cfg.function_set if op not in forbidden]


def random_terminal(cfg: GpConfig, n_vars: int, rng: np.random.Generator) -> Expression:
	if cfg.const_range is None or rng.integers(n_vars + 1) < n_vars:
		return Expression.variable(int(rng.integers(n_vars)))
	low, high = cfg.const_range
	return Expression.constant(float(rng.uniform(low, high)))


def random_tree(
	cfg: GpConfig,
	n_vars: int,
	rng: np.random.Generator,
	depth: int,
	method: str,
	parent_op: str | None = None,
) -> Expression:
	"""
	Grow a random tree.

	'full' places operators on every level above depth, 'grow' stops early with the
	share of terminals among all primitives as probability.
	"""
	ops = _allowed_ops(cfg, parent_op)
	if depth == 0 or not ops:
		return random_terminal(cfg, n_vars, rng)
	if method == 'grow':
		n_terminals = n_vars + (1 if cfg.const_range is not None else 0)
		if rng.random() < n_terminals / (n_terminals + len(cfg.function_set)):
			return random_terminal(cfg, n_vars, rng)
	op = ops[int(rng.integers(len(ops)))]
	children = [random_tree(cfg, n_vars, rng, depth - 1, method, op) for _ in range(arity(op))]
	if op in UNARY_OPS:
		return Expression.unary(op, children[0])
	return Expression.binary(op, children[0], children[1])


def _initial_tree(cfg: GpConfig, n_vars: int, rng: np.random.Generator, method: str) -> Expression:
	low, high = cfg.init_depth
	depth = int(rng.integers(low, high + 1))
	while True:
		for _ in range(MAX_RETRIES):
			tree = random_tree(cfg, n_vars, rng, depth, method)
			if is_valid(tree, cfg):
				return tree
		# deep full trees can exceed max_size, retry shallower
		depth -= 1
		if depth < 0:
			return random_terminal(cfg, n_vars, rng)


def init_population(cfg: GpConfig, n_vars: int, rng: np.random.Generator) -> list[Expression]:
	"""
	Random initial population.

	With 'half and half' the first half is built with the full method and the second
	with grow, depths drawn uniformly from init_depth.

	Args:
	    cfg (GpConfig): run configuration
	    n_vars (int): number of input variables
	    rng (np.random.Generator): random stream of the island

	Returns:
	    list[Expression]: population_size trees respecting max_size and nested_constraints
	"""
	if not cfg.function_set:
		raise ConfigError('the function set is empty')
	if n_vars < 1:
		raise DiscoveryError('at least one input variable is required')
	trees = []
	for i in range(cfg.population_size):
		if cfg.init_method == 'half and half':
			method = 'full' if i < cfg.population_size / 2 else 'grow'
		else:
			method = cfg.init_method
		trees.append(_initial_tree(cfg, n_vars, rng, method))
	return trees


def tournament_select(population: list[Individual], k: int, rng: np.random.Generator) -> Individual:
	"""
	Best of k uniform draws with replacement.

	Ties in fitness go to the smaller tree, then to the lower population index.
	"""
	if not population:
		raise DiscoveryError('cannot select from an empty population')
	if k < 1:
		raise ValueError('tournament size must be at least 1')
	draws = rng.integers(len(population), size=k)
	winner = min(draws, key=lambda i: (population[i].fitness, population[i].complexity, int(i)))
	return population[winner]


def crossover(a: Expression, b: Expression, rng: np.random.Generator) -> Expression:
	"""Replace a uniformly chosen subtree of a with a uniformly chosen subtree of b."""
	position = int(rng.integers(complexity(a)))
	donor = subtree_at(b, int(rng.integers(complexity(b))))
	return replace_subtree(a, position, donor)


def subtree_mutation(a: Expression, cfg: GpConfig, n_vars: int, rng: np.random.Generator) -> Expression:
	"""Replace a random subtree with a fresh grow tree."""
	low, high = cfg.init_depth
	donor = random_tree(cfg, n_vars, rng, int(rng.integers(low, high + 1)), 'grow')
	return replace_subtree(a, int(rng.integers(complexity(a))), donor)


def hoist_mutation(a: Expression, rng: np.random.Generator) -> Expression:
	"""Replace a random subtree with one of its own subtrees; never grows the tree."""
	position = int(rng.integers(complexity(a)))
	subtree = subtree_at(a, position)
	hoisted = subtree_at(subtree, int(rng.integers(complexity(subtree))))
	return replace_subtree(a, position, hoisted)


def point_mutation(a: Expression, cfg: GpConfig, n_vars: int, rng: np.random.Generator) -> Expression:
	"""
	Change a single node: constants take a Gaussian step, variables become another
	terminal and operators another operator of the same arity.
	"""
	position = int(rng.integers(complexity(a)))
	node = subtree_at(a, position)
	if node.kind == NodeKind.constant:
		replacement = Expression.constant(node.value + float(rng.normal(0.0, cfg.const_step)))
	elif node.kind == NodeKind.variable:
		replacement = random_terminal(cfg, n_vars, rng)
	else:
		same_arity = [op for op in cfg.function_set if arity(op) == arity(node.op) and op != node.op]
		if not same_arity:
			return a
		op = same_arity[int(rng.integers(len(same_arity)))]
		if arity(op) == 1:
			replacement = Expression.unary(op, node.children[0])
		else:
			replacement = Expression.binary(op, *node.children)
	return replace_subtree(a, position, replacement)


def vary(parent: Expression, operator: Callable[[], Expression], cfg: GpConfig) -> Expression:
	"""Apply a variation until the offspring is valid, falling back to the parent after the retry cap."""
	for _ in range(MAX_RETRIES):
		child = operator()
		if is_valid(child, cfg):
			return child
	return parent
