"""Infix text format for expressions.

The grammar is the usual one, ``*`` and ``/`` bind tighter than ``+`` and ``-``,
unary minus binds tighter than both, and unary operators use call syntax::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | atom
    atom  := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

A minus sign directly in front of a number literal is folded into the constant.
"""

import re
from typing import NamedTuple, Sequence

from .expression import Expression, NodeKind, UNARY_OPS
from ..exceptions import ExpressionSyntaxError


_TOKEN = re.compile(
	r'\s*(?:'
	r'(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)'
	r'|(?P<name>[^\W\d]\w*)'
	r'|(?P<op>[-+*/()·×÷−])'
	r')'
)

_UNICODE_OPS = {'·': '*', '×': '*', '÷': '/', '−': '-'}

_DEFAULT_NAME = re.compile(r'^x(\d+)$')


class Token(NamedTuple):
	kind: str
	text: str
	column: int


def tokenize(text: str) -> list[Token]:
	tokens = []
	position = 0
	while position < len(text):
		if text[position:].strip() == '':
			break
		match = _TOKEN.match(text, position)
		if match is None or match.end() == position:
			column = position + len(text[position:]) - len(text[position:].lstrip())
			raise ExpressionSyntaxError(f'unexpected character {text[column]!r}', column=column, text=text)
		kind = match.lastgroup
		value = match.group(kind)
		if kind == 'op':
			value = _UNICODE_OPS.get(value, value)
		tokens.append(Token(kind, value, match.start(kind)))
		position = match.end()
	tokens.append(Token('end', '', len(text)))
	return tokens


class _Parser:
	def __init__(self, text: str, names: Sequence[str] | None):
		self.text = text
		self.names = list(names) if names is not None else None
		self.tokens = tokenize(text)
		self.position = 0

	@property
	def current(self) -> Token:
		return self.tokens[self.position]

	def advance(self) -> Token:
		token = self.current
		self.position += 1
		return token

	def fail(self, message: str, token: Token | None = None):
		token = token or self.current
		raise ExpressionSyntaxError(message, column=token.column, text=self.text)

	def expect(self, text: str):
		if self.current.text != text or self.current.kind == 'end':
			self.fail(f'expected {text!r}')
		self.advance()

	def parse(self) -> Expression:
		expr = self.expression()
		if self.current.kind != 'end':
			self.fail(f'unexpected {self.current.text!r}')
		return expr

	def expression(self) -> Expression:
		expr = self.term()
		while self.current.kind == 'op' and self.current.text in '+-':
			op = self.advance().text
			expr = Expression.binary(op, expr, self.term())
		return expr

	def term(self) -> Expression:
		expr = self.unary()
		while self.current.kind == 'op' and self.current.text in '*/':
			op = self.advance().text
			expr = Expression.binary(op, expr, self.unary())
		return expr

	def unary(self) -> Expression:
		if self.current.kind == 'op' and self.current.text == '-':
			self.advance()
			if self.current.kind == 'number':
				return Expression.constant(-float(self.advance().text))
			return Expression.unary('neg', self.unary())
		return self.atom()

	def atom(self) -> Expression:
		token = self.current
		if token.kind == 'number':
			self.advance()
			return Expression.constant(float(token.text))
		if token.kind == 'name':
			self.advance()
			if self.current.kind == 'op' and self.current.text == '(':
				if token.text not in UNARY_OPS:
					self.fail(f'unknown function {token.text!r}', token)
				self.advance()
				inner = self.expression()
				self.expect(')')
				return Expression.unary(token.text, inner)
			return Expression.variable(self.resolve(token))
		if token.kind == 'op' and token.text == '(':
			self.advance()
			inner = self.expression()
			self.expect(')')
			return inner
		if token.kind == 'end':
			self.fail('unexpected end of input')
		self.fail(f'unexpected {token.text!r}')

	def resolve(self, token: Token) -> int:
		if self.names is not None:
			if token.text not in self.names:
				self.fail(f'unknown variable {token.text!r}', token)
			return self.names.index(token.text)
		match = _DEFAULT_NAME.match(token.text)
		if match is None:
			self.fail(f'unknown variable {token.text!r}', token)
		return int(match.group(1))


def parse(text: str, names: Sequence[str] | None = None) -> Expression:
	"""
	Parse infix text into an expression tree.

	Args:
	    text (str): expression text, e.g. '0.3*S*I - 0.1*I'
	    names (Sequence[str] | None): variable names in state order; without names
	        variables are written x0, x1, ...

	Returns:
	    Expression: the parsed tree

	Raises:
	    ExpressionSyntaxError: with the 0-based column of the offending token
	"""
	return _Parser(text, names).parse()


# binding strength used to decide where parentheses are needed
_PRECEDENCE = {'+': 1, '-': 1, '*': 2, '/': 2}
_UNARY_PRECEDENCE = 3
_ATOM_PRECEDENCE = 4


def format_expression(expr: Expression, names: Sequence[str] | None = None, precision: int | None = None) -> str:
	"""
	Render an expression as infix text; parse() reads the output back into the same tree.

	Args:
	    expr (Expression): the tree to render
	    names (Sequence[str] | None): variable names in state order
	    precision (int | None): significant digits for constants, full precision when None

	Returns:
	    str: infix text
	"""
	text, _ = _format(expr, names, precision)
	return text


def _format_number(value: float, precision: int | None) -> str:
	if precision is None:
		return repr(float(value))
	return f'{value:.{precision}g}'


def _format(expr: Expression, names, precision) -> tuple[str, int]:
	if expr.kind == NodeKind.constant:
		text = _format_number(expr.value, precision)
		return text, _UNARY_PRECEDENCE if text.startswith('-') else _ATOM_PRECEDENCE

	if expr.kind == NodeKind.variable:
		if names is None:
			return f'x{expr.index}', _ATOM_PRECEDENCE
		return names[expr.index], _ATOM_PRECEDENCE

	if expr.kind == NodeKind.unary:
		inner, inner_precedence = _format(expr.children[0], names, precision)
		if expr.op == 'neg':
			# a bare literal would be folded into a negative constant when read back
			if inner_precedence < _UNARY_PRECEDENCE or expr.children[0].is_constant:
				inner = f'({inner})'
			return f'-{inner}', _UNARY_PRECEDENCE
		return f'{expr.op}({inner})', _ATOM_PRECEDENCE

	precedence = _PRECEDENCE[expr.op]
	left, left_precedence = _format(expr.children[0], names, precision)
	right, right_precedence = _format(expr.children[1], names, precision)
	if left_precedence < precedence:
		left = f'({left})'
	# operators are left associative, so an equal-strength right operand needs parentheses
	if right_precedence <= precedence:
		right = f'({right})'
	if precedence == 1:
		return f'{left} {expr.op} {right}', precedence
	return f'{left}{expr.op}{right}', precedence
