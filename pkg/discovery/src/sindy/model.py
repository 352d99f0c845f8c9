from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..exprcore import Expression, NodeKind, complexity, format_expression, parse


class SparseModel(BaseModel):
	"""Coefficient matrix Xi of a sparse regression, rows are library terms and columns state variables."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	coefficients: np.ndarray
	optimizer: str
	threshold: float = 0.0
	term_names: list[str] = []
	variables: list[str] = []

	# per state variable
	residuals: list[float] = []
	iterations: list[int] = []
	converged: list[bool] = []
	rank_deficient: list[bool] = []

	@field_validator('coefficients', mode='before')
	@classmethod
	def as_matrix(cls, values: Any) -> np.ndarray:
		array = np.array(values, dtype=float)
		if array.ndim == 1:
			array = array[:, None]
		array.setflags(write=False)
		return array

	@model_validator(mode='after')
	def check_shapes(self):
		n_terms, n_vars = self.coefficients.shape
		if self.term_names and len(self.term_names) != n_terms:
			raise ValueError(f'{len(self.term_names)} term names for {n_terms} coefficient rows')
		if self.variables and len(self.variables) != n_vars:
			raise ValueError(f'{len(self.variables)} variables for {n_vars} coefficient columns')
		return self

	@property
	def n_terms(self) -> int:
		return self.coefficients.shape[0]

	@property
	def n_vars(self) -> int:
		return self.coefficients.shape[1]

	@property
	def support(self) -> np.ndarray:
		return self.coefficients != 0

	@property
	def terms(self) -> list[Expression]:
		return [parse(name, self.variables or None) for name in self.term_names]

	def named(self, terms: list[Expression], variables: list[str]) -> 'SparseModel':
		"""Attach library terms and variable names to a model fitted on bare matrices."""
		return SparseModel(
			**{
				**dict(self),
				'term_names': [format_expression(term, variables) for term in terms],
				'variables': list(variables),
			}
		)

	def to_table(self) -> list[dict[str, Any]]:
		"""One row per library term with its coefficient for every state variable."""
		variables = self.variables or [f'x{i}' for i in range(self.n_vars)]
		names = self.term_names or [f'term{i}' for i in range(self.n_terms)]
		return [
			{'term': name, **{var: float(value) for var, value in zip(variables, row)}}
			for name, row in zip(names, self.coefficients)
		]


def _term_product(coefficient: float, term: Expression) -> Expression:
	if term.is_constant:
		return Expression.constant(coefficient * term.value)
	if coefficient == 1.0:
		return term
	# keep products left associative so the coefficient leads without parentheses
	if term.kind == NodeKind.binary and term.op == '*':
		left, right = term.children
		return _term_product(coefficient, left) * right
	return Expression.constant(coefficient) * term


def model_to_expressions(model: SparseModel, zero_epsilon: float = 0.0) -> list[Expression]:
	"""
	Turn every coefficient column into a sum of coefficient times library term.

	Higher-order terms come first, ties keep library order; coefficients with magnitude
	at or below zero_epsilon are omitted and negative coefficients become subtractions.

	Args:
	    model (SparseModel): fitted model with term names attached
	    zero_epsilon (float): magnitude below which a coefficient counts as zero

	Returns:
	    list[Expression]: one right-hand side per state variable, constant 0 for an empty column
	"""
	terms = model.terms
	order = sorted(range(len(terms)), key=lambda i: (-complexity(terms[i]), i))
	expressions = []
	for column in model.coefficients.T:
		expr = None
		for i in order:
			coefficient, term = float(column[i]), terms[i]
			if coefficient == 0.0 or abs(coefficient) <= zero_epsilon:
				continue
			if expr is None:
				expr = _term_product(coefficient, term)
			elif coefficient < 0:
				expr = expr - _term_product(-coefficient, term)
			else:
				expr = expr + _term_product(coefficient, term)
		expressions.append(expr if expr is not None else Expression.constant(0.0))
	return expressions
