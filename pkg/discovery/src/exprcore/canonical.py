"""Polynomial-plus-transcendental normal form and structural comparison of expressions."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from shared.models import MatchVerdict
from shared.settings import settings
from .expression import Expression, NodeKind, UNARY_OPS
from ..exceptions import NonCanonicalizableError


@dataclass(frozen=True, slots=True)
class Factor:
	"""One multiplicative unit of a monomial: a variable or a unary function of a canonical form."""

	op: str
	index: int = -1
	inner: CanonicalForm | None = None

	@property
	def is_variable(self) -> bool:
		return self.op == 'var'

	def sort_key(self) -> tuple:
		if self.is_variable:
			return (0, self.index)
		return (1, self.op, self.inner.sort_key())

	def family_key(self) -> tuple:
		"""Signature used for structural comparison; sin(c*x) and sin(x) share one, sin(x + c) does not."""
		if self.is_variable:
			return ('var', self.index)
		if self.inner.is_linear():
			return (self.op, 'linear', self.inner.variable_set())
		return (self.op, 'form', self.inner.signature())

	def to_expression(self) -> Expression:
		if self.is_variable:
			return Expression.variable(self.index)
		return Expression.unary(self.op, self.inner.to_expression())


Monomial = tuple[Factor, ...]


def _monomial_key(monomial: Monomial) -> tuple:
	return tuple(factor.sort_key() for factor in monomial)


def _term_signature(monomial: Monomial) -> tuple:
	return tuple(sorted(factor.family_key() for factor in monomial))


@dataclass(frozen=True, slots=True)
class CanonicalForm:
	"""Sum of (coefficient, monomial) terms with like terms merged and a deterministic order."""

	terms: tuple[tuple[float, Monomial], ...] = ()

	def __len__(self) -> int:
		return len(self.terms)

	def sort_key(self) -> tuple:
		return tuple((_monomial_key(monomial), coefficient) for coefficient, monomial in self.terms)

	def signature(self) -> tuple:
		return tuple(sorted(_term_signature(monomial) for _, monomial in self.terms))

	def is_linear(self) -> bool:
		"""Weighted sum of plain variables without a constant term."""
		return bool(self.terms) and all(len(monomial) == 1 and monomial[0].is_variable for _, monomial in self.terms)

	def variable_set(self) -> tuple[int, ...]:
		return tuple(sorted({f.index for _, monomial in self.terms for f in monomial if f.is_variable}))

	def constant_value(self) -> float | None:
		if not self.terms:
			return 0.0
		if len(self.terms) == 1 and not self.terms[0][1]:
			return self.terms[0][0]
		return None

	def negated(self) -> CanonicalForm:
		return CanonicalForm(tuple((-coefficient, monomial) for coefficient, monomial in self.terms))

	def to_expression(self) -> Expression:
		"""Rebuild an equivalent expression tree, coefficients leading each product."""
		if not self.terms:
			return Expression.constant(0.0)
		result = None
		for coefficient, monomial in self.terms:
			if result is None:
				result = _term_expression(coefficient, monomial)
			elif coefficient < 0:
				result = result - _term_expression(-coefficient, monomial)
			else:
				result = result + _term_expression(coefficient, monomial)
		return result


def _term_expression(coefficient: float, monomial: Monomial) -> Expression:
	if not monomial:
		return Expression.constant(coefficient)
	factors = [factor.to_expression() for factor in monomial]
	product = factors[0] if coefficient == 1.0 else Expression.constant(coefficient) * factors[0]
	for factor in factors[1:]:
		product = product * factor
	return product


def _term_coefficients(coefficient: float, monomial: Monomial) -> list[float]:
	values = [coefficient]
	for factor in monomial:
		if not factor.is_variable:
			for inner_coefficient, inner_monomial in factor.inner.terms:
				values.extend(_term_coefficients(inner_coefficient, inner_monomial))
	return values


def _add(a: dict, b: dict) -> dict:
	result = defaultdict(float, a)
	for monomial, coefficient in b.items():
		result[monomial] += coefficient
	return dict(result)


def _scale(a: dict, factor: float) -> dict:
	return {monomial: coefficient * factor for monomial, coefficient in a.items()}


def _multiply(a: dict, b: dict) -> dict:
	result = defaultdict(float)
	for left, left_coefficient in a.items():
		for right, right_coefficient in b.items():
			monomial = tuple(sorted(left + right, key=Factor.sort_key))
			result[monomial] += left_coefficient * right_coefficient
	return dict(result)


def _finish(poly: dict, coeff_epsilon: float) -> CanonicalForm:
	kept = [(coefficient, monomial) for monomial, coefficient in poly.items() if abs(coefficient) >= coeff_epsilon]
	kept.sort(key=lambda term: _monomial_key(term[1]))
	return CanonicalForm(tuple(kept))


def _poly(expr: Expression, coeff_epsilon: float) -> dict:
	if expr.kind == NodeKind.constant:
		return {(): expr.value} if expr.value != 0.0 else {}

	if expr.kind == NodeKind.variable:
		return {(Factor('var', index=expr.index),): 1.0}

	if expr.kind == NodeKind.unary:
		if expr.op == 'neg':
			return _scale(_poly(expr.children[0], coeff_epsilon), -1.0)
		inner = _finish(_poly(expr.children[0], coeff_epsilon), coeff_epsilon)
		value = inner.constant_value()
		if value is not None:
			folded = float(UNARY_OPS[expr.op](value))
			if not math.isfinite(folded):
				raise NonCanonicalizableError(f'{expr.op}({value}) is not finite')
			return {(): folded} if folded != 0.0 else {}
		sign = 1.0
		# sin is odd and cos is even, keep the leading inner coefficient positive
		if expr.op in ('sin', 'cos') and inner.terms[0][0] < 0:
			inner = inner.negated()
			sign = -1.0 if expr.op == 'sin' else 1.0
		return {(Factor(expr.op, inner=inner),): sign}

	left, right = (_poly(child, coeff_epsilon) for child in expr.children)
	if expr.op == '+':
		return _add(left, right)
	if expr.op == '-':
		return _add(left, _scale(right, -1.0))
	if expr.op == '*':
		return _multiply(left, right)

	divisor = _finish(right, coeff_epsilon).constant_value()
	if divisor is None:
		raise NonCanonicalizableError('division by a non-constant expression')
	if divisor == 0.0:
		raise NonCanonicalizableError('division by zero')
	return _scale(left, 1.0 / divisor)


def canonicalize(expr: Expression, coeff_epsilon: float | None = None) -> CanonicalForm:
	"""
	Bring an expression into polynomial-plus-transcendental normal form.

	Products are distributed over sums, constants folded and like terms merged; terms
	whose coefficient magnitude falls below coeff_epsilon are dropped.

	Args:
	    expr (Expression): expression over +, -, *, division by constants and unary ops
	    coeff_epsilon (float | None): drop threshold, settings.COEFF_EPSILON when None

	Returns:
	    CanonicalForm: the normal form

	Raises:
	    NonCanonicalizableError: for division by a non-constant or a non-finite folded constant
	"""
	if coeff_epsilon is None:
		coeff_epsilon = settings.COEFF_EPSILON
	return _finish(_poly(expr, coeff_epsilon), coeff_epsilon)


def _close(a: float, b: float, rtol: float) -> bool:
	return abs(a - b) <= rtol * max(abs(a), abs(b))


def structural_match(
	candidate: Expression,
	truth: Expression,
	coeff_rtol: float | None = None,
	coeff_epsilon: float | None = None,
) -> MatchVerdict:
	"""
	Compare the structural form of a recovered expression with the true one.

	Args:
	    candidate (Expression): recovered expression
	    truth (Expression): ground-truth expression over the same variables
	    coeff_rtol (float | None): relative coefficient tolerance for exact_form
	    coeff_epsilon (float | None): canonicalization drop threshold

	Returns:
	    MatchVerdict: exact_form, form_only or mismatch
	"""
	if coeff_rtol is None:
		coeff_rtol = settings.COEFF_RTOL
	try:
		candidate_form = canonicalize(candidate, coeff_epsilon)
		truth_form = canonicalize(truth, coeff_epsilon)
	except NonCanonicalizableError:
		return _tree_match(candidate, truth, coeff_rtol)

	candidate_terms = sorted(
		(_term_signature(monomial), _term_coefficients(coefficient, monomial))
		for coefficient, monomial in candidate_form.terms
	)
	truth_terms = sorted(
		(_term_signature(monomial), _term_coefficients(coefficient, monomial))
		for coefficient, monomial in truth_form.terms
	)
	if [signature for signature, _ in candidate_terms] != [signature for signature, _ in truth_terms]:
		return MatchVerdict.mismatch

	for (_, found), (_, expected) in zip(candidate_terms, truth_terms):
		if len(found) != len(expected) or not all(_close(a, b, coeff_rtol) for a, b in zip(found, expected)):
			return MatchVerdict.form_only
	return MatchVerdict.exact_form


def _ordered_children(expr: Expression) -> list[Expression]:
	children = list(expr.children)
	if expr.kind == NodeKind.binary and expr.op in ('+', '*'):
		children.sort(key=_shape)
	return children


def _shape(expr: Expression) -> str:
	if expr.kind == NodeKind.constant:
		return 'c'
	if expr.kind == NodeKind.variable:
		return f'v{expr.index}'
	parts = [_shape(child) for child in _ordered_children(expr)]
	return f'{expr.op}({",".join(parts)})'


def _ordered_constants(expr: Expression) -> list[float]:
	if expr.kind == NodeKind.constant:
		return [expr.value]
	values = []
	for child in _ordered_children(expr):
		values.extend(_ordered_constants(child))
	return values


def _tree_match(candidate: Expression, truth: Expression, coeff_rtol: float) -> MatchVerdict:
	# raw tree isomorphism modulo commutativity of + and *
	if _shape(candidate) != _shape(truth):
		return MatchVerdict.mismatch
	pairs = zip(_ordered_constants(candidate), _ordered_constants(truth))
	if all(_close(a, b, coeff_rtol) for a, b in pairs):
		return MatchVerdict.exact_form
	return MatchVerdict.form_only
