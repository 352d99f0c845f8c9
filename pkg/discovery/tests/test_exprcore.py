import math

import numpy as np
import pytest

from shared.models import MatchVerdict
from discovery.src.exceptions import ExpressionError, ExpressionSyntaxError, NonCanonicalizableError
from discovery.src.exprcore import (
	Expression,
	NodeKind,
	canonicalize,
	complexity,
	constants,
	depth,
	evaluate,
	evaluate_batch,
	format_expression,
	parse,
	preorder,
	replace_subtree,
	structural_match,
	with_constants,
)

SIR = ['S', 'I', 'R']


def test_parse_precedence():
	"""Multiplication binds tighter than addition, unary minus tighter than both"""
	assert evaluate(parse('1 + 2*x0'), [3.0]) == 7.0
	assert evaluate(parse('-x0*x1'), [2.0, 3.0]) == -6.0
	assert evaluate(parse('x0 - x1 - x2'), [1.0, 2.0, 3.0]) == -4.0
	assert evaluate(parse('x0/x1/x2'), [8.0, 2.0, 2.0]) == 2.0


def test_parse_named_variables():
	"""Names resolve to their position in the variable list"""
	expr = parse('0.3*S*I - 0.1*I', SIR)
	assert evaluate(expr, [1.0, 2.0, 0.0]) == pytest.approx(0.4)


def test_parse_unicode_operators():
	"""Typographic operators read like their ASCII counterparts"""
	assert parse('0.3·S×I − 0.1·I', SIR) == parse('0.3*S*I - 0.1*I', SIR)
	assert parse('S ÷ 2', SIR) == parse('S / 2', SIR)


def test_parse_folds_negative_literals():
	assert parse('-2.5*x0').children[0] == Expression.constant(-2.5)


@pytest.mark.parametrize(
	'text,column',
	[
		('S + * I', 4),
		('S + ', 4),
		('(S + I', 6),
		('S $ I', 2),
		('Q*S', 0),
		('exp(S)', 0),
	],
)
def test_parse_errors_report_column(text, column):
	"""Every syntax error carries the 0-based column of the offending token"""
	with pytest.raises(ExpressionSyntaxError) as e:
		parse(text, SIR)
	assert e.value.column == column


@pytest.mark.parametrize(
	'text',
	[
		'-0.3*S*I + 0.1*I',
		'sin(-2.0*S) - -I',
		'S*(I - R)',
		'S - (I - R)',
		'S/(I*R)',
		'-(2.0)*cos(S)',
		'sqrt(S*S + 1e-12) + 0.1',
	],
)
def test_format_reads_back_into_the_same_tree(text):
	expr = parse(text, SIR)
	assert parse(format_expression(expr, SIR), SIR) == expr


def test_format_full_precision_round_trips_constants():
	value = 0.1 + 0.2
	expr = Expression.constant(value) * Expression.variable(0)
	assert parse(format_expression(expr)).children[0].value == value


def test_format_significant_digits():
	expr = parse('-9.80665*sin(theta)', ['theta', 'omega'])
	assert format_expression(expr, ['theta', 'omega'], 3) == '-9.81*sin(theta)'


def test_format_default_variable_names():
	assert format_expression(parse('x0*x1 + x2')) == 'x0*x1 + x2'


def test_tree_measures():
	expr = parse('x0*sin(x1) + 2.0')
	assert complexity(expr) == 6
	assert depth(expr) == 3
	assert depth(Expression.variable(0)) == 0
	assert [node.kind for node in preorder(expr)][:3] == [NodeKind.binary, NodeKind.binary, NodeKind.variable]


def test_replace_subtree_by_preorder_position():
	expr = parse('x0 + x1')
	assert replace_subtree(expr, 2, parse('sin(x0)')) == parse('x0 + sin(x0)')
	assert replace_subtree(expr, 0, Expression.variable(3)) == Expression.variable(3)
	with pytest.raises(ExpressionError):
		replace_subtree(expr, 5, Expression.variable(0))


def test_constants_substitution_keeps_structure():
	expr = parse('2.0*x0 + 3.0')
	assert constants(expr) == [2.0, 3.0]
	assert with_constants(expr, [1.0, 4.0]) == parse('1.0*x0 + 4.0')
	with pytest.raises(ExpressionError):
		with_constants(expr, [1.0])


def test_malformed_nodes_rejected():
	with pytest.raises(ExpressionError):
		Expression(NodeKind.unary, op='sin')
	with pytest.raises(ExpressionError):
		Expression(NodeKind.variable, index=-1)
	with pytest.raises(ExpressionError):
		Expression.unary('tanh', Expression.variable(0))


def test_evaluate_batch_does_not_raise_on_domain_errors():
	"""Division by zero and sqrt of negatives turn into inf/nan values"""
	points = np.array([[0.0], [-1.0]])
	values = evaluate_batch(parse('1/x0'), points)
	assert math.isinf(values[0])
	assert math.isnan(evaluate_batch(parse('sqrt(x0)'), points)[1])


def test_evaluate_batch_constant_broadcasts():
	values = evaluate_batch(Expression.constant(2.0), np.zeros((4, 2)))
	assert values.shape == (4,)
	assert np.all(values == 2.0)


def test_evaluate_batch_checks_variable_count():
	with pytest.raises(ExpressionError):
		evaluate_batch(parse('x2'), np.zeros((3, 2)))


def test_canonicalize_distributes_and_merges():
	"""Equal polynomials in different shapes share one normal form"""
	a = canonicalize(parse('x0*(x1 + 2.0)'))
	b = canonicalize(parse('2.0*x0 + x1*x0'))
	assert a.sort_key() == b.sort_key()
	assert len(canonicalize(parse('x0 - x0'))) == 0


def test_canonicalize_folds_division_by_constants():
	a = canonicalize(parse('x0/4.0'))
	b = canonicalize(parse('0.25*x0'))
	assert a.sort_key() == b.sort_key()


def test_canonicalize_rejects_division_by_variables():
	with pytest.raises(NonCanonicalizableError):
		canonicalize(parse('x0/x1'))


def test_canonicalize_drops_tiny_coefficients():
	form = canonicalize(parse('x0 + 1e-12*x1'), coeff_epsilon=1e-9)
	assert form.sort_key() == canonicalize(parse('x0')).sort_key()


@pytest.mark.parametrize(
	'candidate,truth,verdict',
	[
		('0.301*S*I - 0.1*I', '0.3*S*I - 0.1*I', MatchVerdict.exact_form),
		('I*(0.3*S - 0.1)', '0.3*S*I - 0.1*I', MatchVerdict.exact_form),
		('0.5*S*I - 0.1*I', '0.3*S*I - 0.1*I', MatchVerdict.form_only),
		('0.3*S*I', '0.3*S*I - 0.1*I', MatchVerdict.mismatch),
		('0.3*S*I - 0.1*I + 0.2*R', '0.3*S*I - 0.1*I', MatchVerdict.mismatch),
		('-9.8*sin(2.0*S)', '-9.8*sin(S)', MatchVerdict.form_only),
		('-9.17*sin(1.08*S)', '-9.8*sin(S)', MatchVerdict.form_only),
		('sin(S + 0.5)', 'sin(S)', MatchVerdict.mismatch),
		('-9.8*sin(S + 0.5)', '-9.8*sin(S)', MatchVerdict.mismatch),
		('-sin(-S)', 'sin(S)', MatchVerdict.exact_form),
		('cos(-S)', 'cos(S)', MatchVerdict.exact_form),
		('S/I', 'S/I', MatchVerdict.exact_form),
		('I/S', 'S/I', MatchVerdict.mismatch),
	],
)
def test_structural_match(candidate, truth, verdict):
	assert structural_match(parse(candidate, SIR), parse(truth, SIR), coeff_rtol=0.05) == verdict


def test_structural_match_lorenz_term_sets():
	"""A missing x*y product is a different form however close the rest is"""
	xyz = ['x', 'y', 'z']
	assert structural_match(parse('0.19*y - z', xyz), parse('x*y - 2.6*z', xyz)) == MatchVerdict.mismatch


@pytest.mark.parametrize(
	'text',
	[
		'x0*(x1 + 2.0) - 3*x2',
		'(x0 - x1)*(x0 + x1)',
		'-9.8*sin(-2*x0) + cos(x1 + 0.5)*x2',
		'0.5*(x0 + 1)*(x0 + 1) - x0/4',
	],
)
def test_canonical_form_evaluates_like_the_original(text):
	points = np.random.default_rng(0).uniform(-2.0, 2.0, size=(50, 3))
	expr = parse(text)
	rebuilt = canonicalize(expr).to_expression()
	assert evaluate_batch(rebuilt, points) == pytest.approx(evaluate_batch(expr, points), rel=1e-10, abs=1e-10)
