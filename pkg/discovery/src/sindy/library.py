from dataclasses import replace
from itertools import combinations, combinations_with_replacement
from typing import Sequence

import numpy as np

from shared.logger import logger
from .config import LibrarySpec
from ..exceptions import ExpressionError, LibraryError
from ..exprcore import Expression, canonicalize, evaluate_batch, parse, variable_indices
from ..odeint import Trajectory


PLACEHOLDERS = ['x', 'y', 'z']


def _bind(expr: Expression, mapping: dict[int, int]) -> Expression:
	if expr.is_variable:
		return Expression.variable(mapping[expr.index])
	if not expr.children:
		return expr
	return replace(expr, children=tuple(_bind(child, mapping) for child in expr.children))


def _product(indices: Sequence[int]) -> Expression:
	term = Expression.variable(indices[0])
	for index in indices[1:]:
		term = term * Expression.variable(index)
	return term


def _polynomial_terms(n_vars: int, degree: int) -> list[Expression]:
	terms = []
	for d in range(1, degree + 1):
		terms.extend(_product(indices) for indices in combinations_with_replacement(range(n_vars), d))
	return terms


def _fourier_terms(n_vars: int, frequencies: int) -> list[Expression]:
	terms = []
	for index in range(n_vars):
		for k in range(1, frequencies + 1):
			argument = Expression.variable(index) if k == 1 else Expression.constant(k) * Expression.variable(index)
			terms.append(Expression.unary('sin', argument))
			terms.append(Expression.unary('cos', argument))
	return terms


def _custom_terms(n_vars: int, templates: list[str]) -> list[Expression]:
	terms = []
	for template in templates:
		try:
			pattern = parse(template, PLACEHOLDERS)
		except ExpressionError as e:
			raise LibraryError(f'invalid custom term {template!r}: {e.message}')
		placeholders = sorted(variable_indices(pattern))
		for chosen in combinations(range(n_vars), len(placeholders)):
			terms.append(_bind(pattern, dict(zip(placeholders, chosen))))
	return terms


def _key(term: Expression) -> tuple:
	return canonicalize(term).sort_key()


def library_terms(variables: Sequence[str], lib: LibrarySpec) -> list[Expression]:
	"""
	Expand the term generators into a duplicate-free list of candidate functions.

	Terms are ordered bias, polynomial, Fourier, custom, pairwise products; a term that
	is canonically equal to an earlier one is dropped, as are the excluded terms.

	Args:
	    variables (Sequence[str]): state variable names
	    lib (LibrarySpec): the generators

	Returns:
	    list[Expression]: one expression per library column
	"""
	n_vars = len(variables)
	base = []
	if lib.polynomial_degree > 0:
		if lib.include_bias:
			base.append(Expression.constant(1.0))
		base.extend(_polynomial_terms(n_vars, lib.polynomial_degree))
	base.extend(_fourier_terms(n_vars, lib.fourier_frequencies))
	base.extend(_custom_terms(n_vars, lib.custom))

	candidates = list(base)
	if lib.pairwise:
		varying = [term for term in base if not term.is_constant]
		candidates.extend(left * right for left, right in combinations(varying, 2))

	excluded = set()
	for text in lib.exclude:
		try:
			excluded.add(_key(parse(text, variables)))
		except ExpressionError as e:
			raise LibraryError(f'invalid excluded term {text!r}: {e.message}')

	terms, seen = [], set()
	for term in candidates:
		key = _key(term)
		if key in seen or key in excluded:
			continue
		seen.add(key)
		terms.append(term)

	if not terms:
		raise LibraryError('the candidate library is empty')
	return terms


def build_library(traj: Trajectory, lib: LibrarySpec) -> tuple[np.ndarray, list[Expression]]:
	"""
	Evaluate the candidate library along a trajectory.

	Args:
	    traj (Trajectory): sampled states
	    lib (LibrarySpec): the generators

	Returns:
	    tuple[np.ndarray, list[Expression]]: Theta with one row per sample and one column
	        per term, and the term expressions in column order
	"""
	terms = library_terms(traj.variables, lib)
	theta = np.column_stack([evaluate_batch(term, traj.states) for term in terms])
	if not np.all(np.isfinite(theta)):
		raise LibraryError('library terms evaluate to non-finite values', system_id=traj.system_id)
	logger.debug(f'Built library with {len(terms)} terms on {traj.n_samples} samples')
	return theta, terms
