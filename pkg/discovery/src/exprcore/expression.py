from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ..exceptions import ExpressionError


class NodeKind(str, Enum):
	constant = 'constant'
	variable = 'variable'
	unary = 'unary'
	binary = 'binary'


UNARY_OPS = {
	'neg': np.negative,
	'sin': np.sin,
	'cos': np.cos,
	'sqrt': np.sqrt,
}

BINARY_OPS = {
	'+': np.add,
	'-': np.subtract,
	'*': np.multiply,
	'/': np.divide,
}

# spellings accepted in configs and function sets
OP_ALIASES = {
	'add': '+',
	'sub': '-',
	'mul': '*',
	'div': '/',
	'×': '*',
	'·': '*',
	'÷': '/',
	'−': '-',
}


def canonical_op(name: str) -> str:
	"""Map an operator spelling to the symbol used inside trees.

	Args:
	    name (str): operator name or symbol, e.g. 'mul', '*', 'sin'

	Returns:
	    str: the canonical spelling

	Raises:
	    ExpressionError: when the operator is not supported
	"""
	op = OP_ALIASES.get(name, name)
	if op not in UNARY_OPS and op not in BINARY_OPS:
		raise ExpressionError(f'Unsupported operator {name!r}')
	return op


def arity(op: str) -> int:
	return 1 if op in UNARY_OPS else 2


@dataclass(frozen=True, slots=True)
class Expression:
	"""Immutable operator tree over state variables and real constants."""

	kind: NodeKind
	op: str | None = None
	children: tuple[Expression, ...] = ()
	value: float = 0.0
	index: int = -1

	def __post_init__(self):
		if self.kind == NodeKind.constant:
			if self.children or self.op is not None:
				raise ExpressionError('constant nodes take no operator and no children')
		elif self.kind == NodeKind.variable:
			if self.children or self.op is not None or self.index < 0:
				raise ExpressionError(f'variable node needs a non-negative index, got {self.index}')
		elif self.kind == NodeKind.unary:
			if self.op not in UNARY_OPS or len(self.children) != 1:
				raise ExpressionError(f'unary node {self.op!r} needs exactly one child')
		elif self.kind == NodeKind.binary:
			if self.op not in BINARY_OPS or len(self.children) != 2:
				raise ExpressionError(f'binary node {self.op!r} needs exactly two children')
		else:
			raise ExpressionError(f'unknown node kind {self.kind!r}')

	@classmethod
	def constant(cls, value: float) -> Expression:
		return cls(NodeKind.constant, value=float(value))

	@classmethod
	def variable(cls, index: int) -> Expression:
		return cls(NodeKind.variable, index=int(index))

	@classmethod
	def unary(cls, op: str, child: Expression) -> Expression:
		return cls(NodeKind.unary, op=canonical_op(op), children=(child,))

	@classmethod
	def binary(cls, op: str, left: Expression, right: Expression) -> Expression:
		return cls(NodeKind.binary, op=canonical_op(op), children=(left, right))

	@property
	def is_constant(self) -> bool:
		return self.kind == NodeKind.constant

	@property
	def is_variable(self) -> bool:
		return self.kind == NodeKind.variable

	@property
	def is_terminal(self) -> bool:
		return not self.children

	def __add__(self, other: Expression | float) -> Expression:
		return Expression.binary('+', self, _lift(other))

	def __radd__(self, other: float) -> Expression:
		return Expression.binary('+', _lift(other), self)

	def __sub__(self, other: Expression | float) -> Expression:
		return Expression.binary('-', self, _lift(other))

	def __rsub__(self, other: float) -> Expression:
		return Expression.binary('-', _lift(other), self)

	def __mul__(self, other: Expression | float) -> Expression:
		return Expression.binary('*', self, _lift(other))

	def __rmul__(self, other: float) -> Expression:
		return Expression.binary('*', _lift(other), self)

	def __truediv__(self, other: Expression | float) -> Expression:
		return Expression.binary('/', self, _lift(other))

	def __neg__(self) -> Expression:
		return Expression.unary('neg', self)

	def __str__(self) -> str:
		from .parser import format_expression

		return format_expression(self)


def _lift(value: Expression | float) -> Expression:
	if isinstance(value, Expression):
		return value
	return Expression.constant(value)


def complexity(expr: Expression) -> int:
	"""Total number of nodes in the tree."""
	return 1 + sum(complexity(child) for child in expr.children)


def depth(expr: Expression) -> int:
	"""Number of edges on the longest root-to-leaf path; a terminal has depth 0."""
	if not expr.children:
		return 0
	return 1 + max(depth(child) for child in expr.children)


def variable_indices(expr: Expression) -> set[int]:
	if expr.is_variable:
		return {expr.index}
	found: set[int] = set()
	for child in expr.children:
		found |= variable_indices(child)
	return found


def preorder(expr: Expression) -> list[Expression]:
	"""All nodes of the tree, root first, children left to right."""
	nodes = [expr]
	for child in expr.children:
		nodes.extend(preorder(child))
	return nodes


def subtree_at(expr: Expression, position: int) -> Expression:
	return preorder(expr)[position]


def replace_subtree(expr: Expression, position: int, new: Expression) -> Expression:
	"""Return a copy of expr with the node at pre-order position replaced by new."""
	if position == 0:
		return new
	offset = 1
	children = list(expr.children)
	for i, child in enumerate(children):
		size = complexity(child)
		if offset <= position < offset + size:
			children[i] = replace_subtree(child, position - offset, new)
			return replace(expr, children=tuple(children))
		offset += size
	raise ExpressionError(f'position {position} outside of a tree with {offset} nodes')


def constants(expr: Expression) -> list[float]:
	"""Constant values in pre-order."""
	return [node.value for node in preorder(expr) if node.is_constant]


def with_constants(expr: Expression, values) -> Expression:
	"""Substitute constant values in pre-order; the structure stays unchanged."""
	values = [float(v) for v in values]
	if len(values) != len(constants(expr)):
		raise ExpressionError(f'expected {len(constants(expr))} constants, got {len(values)}')
	feed = iter(values)

	def _rebuild(node: Expression) -> Expression:
		if node.is_constant:
			return Expression.constant(next(feed))
		if not node.children:
			return node
		return replace(node, children=tuple(_rebuild(child) for child in node.children))

	return _rebuild(expr)


def evaluate_batch(expr: Expression, inputs) -> np.ndarray:
	"""
	Evaluate an expression on many points at once.

	Args:
	    expr (Expression): the tree to evaluate
	    inputs (array-like): matrix with one row per point and one column per variable

	Returns:
	    np.ndarray: one value per row; division by zero or sqrt of negative values
	        yield inf/nan instead of raising
	"""
	points = np.asarray(inputs, dtype=float)
	if points.ndim == 1:
		points = points[None, :]
	needed = max(variable_indices(expr), default=-1) + 1
	if points.shape[1] < needed:
		raise ExpressionError(f'expression uses {needed} variables, points have {points.shape[1]}')

	with np.errstate(all='ignore'):
		values = _evaluate(expr, points)
	return np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],)).copy()


def _evaluate(expr: Expression, points: np.ndarray):
	if expr.kind == NodeKind.constant:
		return expr.value
	if expr.kind == NodeKind.variable:
		return points[:, expr.index]
	if expr.kind == NodeKind.unary:
		return UNARY_OPS[expr.op](_evaluate(expr.children[0], points))
	left, right = expr.children
	return BINARY_OPS[expr.op](_evaluate(left, points), _evaluate(right, points))


def evaluate(expr: Expression, point) -> float:
	"""Evaluate an expression at a single point given as a vector of variable values."""
	return float(evaluate_batch(expr, np.asarray(point, dtype=float).reshape(1, -1))[0])
