from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..exceptions import ExpressionError
from ..exprcore import canonical_op


def _operator(name: str) -> str:
	try:
		return canonical_op(name)
	except ExpressionError as e:
		raise ValueError(e.message)


class GpConfig(BaseModel):
	"""Hyperparameters of one genetic-programming run.

	The four variation probabilities may sum to less than one; the remainder is
	plain reproduction. Every island evolves population_size individuals.
	"""

	model_config = ConfigDict(extra='forbid')

	population_size: int = Field(1000, ge=1)
	generations: int = Field(20, ge=1)
	tournament_size: int = Field(20, ge=1)
	stopping_criteria: float = Field(0.0, ge=0)
	p_crossover: float = Field(0.7, ge=0, le=1)
	p_subtree_mutation: float = Field(0.1, ge=0, le=1)
	p_hoist_mutation: float = Field(0.05, ge=0, le=1)
	p_point_mutation: float = Field(0.1, ge=0, le=1)
	init_depth: tuple[int, int] = (2, 4)
	init_method: Literal['half and half', 'full', 'grow'] = 'half and half'
	parsimony_coefficient: float = Field(0.001, ge=0)
	function_set: list[str] = ['+', '-', '*', '/']
	max_size: int = Field(30, ge=3)
	# outer operator -> operators not allowed directly inside it
	nested_constraints: dict[str, list[str]] = {}
	const_range: tuple[float, float] | None = (-2.0, 2.0)
	# standard deviation of the Gaussian step applied by point mutation to constants
	const_step: float = Field(0.1, gt=0)
	seed: int = 0
	n_populations: int = Field(1, ge=1)
	migration_interval: int = Field(10, ge=1)
	n_migrants: int = Field(5, ge=0)
	model_selection: Literal['best', 'accuracy'] = 'best'
	optimize_constants: bool = False
	constant_iters: int = Field(100, ge=1)
	n_samples: int | None = Field(None, ge=2)
	# state variable -> overrides for that regression target
	targets: dict[str, dict[str, Any]] = {}

	@field_validator('function_set')
	@classmethod
	def canonical_function_set(cls, values: list[str]) -> list[str]:
		ops = []
		for name in values:
			op = _operator(name)
			if op not in ops:
				ops.append(op)
		return ops

	@field_validator('nested_constraints')
	@classmethod
	def canonical_constraints(cls, values: dict[str, list[str]]) -> dict[str, list[str]]:
		return {_operator(outer): [_operator(inner) for inner in inners] for outer, inners in values.items()}

	@model_validator(mode='after')
	def check_consistency(self):
		total = self.p_crossover + self.p_subtree_mutation + self.p_hoist_mutation + self.p_point_mutation
		if total > 1.0 + 1e-12:
			raise ValueError(f'variation probabilities sum to {total:.3f}, at most 1 is allowed')
		if self.tournament_size > self.population_size:
			raise ValueError('tournament_size cannot exceed population_size')
		low, high = self.init_depth
		if not 0 <= low <= high:
			raise ValueError(f'init_depth must satisfy 0 <= min <= max, got {self.init_depth}')
		if self.const_range is not None and self.const_range[0] > self.const_range[1]:
			raise ValueError(f'const_range must be ordered, got {self.const_range}')
		if self.n_migrants >= self.population_size and self.n_populations > 1:
			raise ValueError('n_migrants must be smaller than population_size')
		return self

	def for_target(self, name: str) -> 'GpConfig':
		"""Configuration for one regression target with its overrides applied."""
		override = self.targets.get(name)
		if not override:
			return self
		return GpConfig.model_validate({**self.model_dump(exclude={'targets'}), **override})
