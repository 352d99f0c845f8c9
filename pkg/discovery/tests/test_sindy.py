import numpy as np
import pytest
from pydantic import ValidationError

from shared.models import MatchVerdict, MethodEnum
from conftest import exact_derivatives
from discovery.src.dynsys import builtin_spec
from discovery.src.exceptions import DimensionError, LibraryError
from discovery.src.exprcore import format_expression, parse, structural_match
from discovery.src.process_simulate import simulate_system
from discovery.src.sindy import (
	LibrarySpec,
	OmpParams,
	SparseModel,
	Sr3Params,
	StlsqParams,
	build_library,
	fit,
	library_terms,
	model_to_expressions,
	omp,
	sparse_params,
	sr3,
	stlsq,
	threshold_scan,
)

TRUE_COEF = np.array([1.5, 0.0, -2.0, 0.0, 0.0])

# libraries that contain every true term of the built-in systems
LIBRARIES = {
	'lorenz': LibrarySpec(polynomial_degree=2),
	'pendulum': LibrarySpec(polynomial_degree=1, fourier_frequencies=1),
	'lotka_volterra': LibrarySpec(polynomial_degree=2),
	'sis': LibrarySpec(),
	'sir': LibrarySpec(),
	'seir': LibrarySpec(),
	# R = 10*D along the whole trajectory, so every D column duplicates an R column or R^2
	'seird': LibrarySpec(exclude=['D', 'S*D', 'E*D', 'I*D', 'R*D']),
	'sirv': LibrarySpec(),
	'sirs': LibrarySpec(),
}


@pytest.fixture
def regression_problem():
	"""Well-conditioned random library with a two-term truth"""
	rng = np.random.default_rng(0)
	theta = rng.normal(size=(200, 5))
	return theta, theta @ TRUE_COEF


def names(variables, lib):
	return [format_expression(term, variables) for term in library_terms(variables, lib)]


def test_default_library_is_the_epidemic_one():
	"""Without generators the library is {x, x*y} over distinct variables"""
	assert names(['S', 'I', 'R'], LibrarySpec()) == ['S', 'I', 'R', 'S*I', 'S*R', 'I*R']


def test_polynomial_library():
	assert names(['x', 'y'], LibrarySpec(polynomial_degree=2)) == ['1.0', 'x', 'y', 'x*x', 'x*y', 'y*y']
	assert names(['x', 'y'], LibrarySpec(polynomial_degree=1, include_bias=False)) == ['x', 'y']


def test_fourier_library():
	expected = ['sin(a)', 'cos(a)', 'sin(2.0*a)', 'cos(2.0*a)']
	assert names(['a'], LibrarySpec(fourier_frequencies=2)) == expected


def test_library_drops_duplicates_and_exclusions():
	assert names(['a', 'b'], LibrarySpec(polynomial_degree=1, custom=['x'])) == ['1.0', 'a', 'b']
	assert 'x*y' not in names(['x', 'y'], LibrarySpec(polynomial_degree=2, exclude=['y*x']))


def test_pairwise_products():
	terms = names(['a', 'b'], LibrarySpec(fourier_frequencies=1, pairwise=True))
	assert terms[:4] == ['sin(a)', 'cos(a)', 'sin(b)', 'cos(b)']
	assert 'sin(a)*cos(b)' in terms
	assert len(terms) == 4 + 6


def test_invalid_library_terms():
	with pytest.raises(LibraryError):
		library_terms(['a'], LibrarySpec(custom=['x*(']))
	with pytest.raises(LibraryError):
		library_terms(['a'], LibrarySpec(custom=['x'], exclude=['a']))


def test_build_library_matrix(sir_traj):
	theta, terms = build_library(sir_traj, LibrarySpec())
	assert theta.shape == (sir_traj.n_samples, 6)
	assert theta[:, 3] == pytest.approx(sir_traj.states[:, 0] * sir_traj.states[:, 1])
	assert len(terms) == 6


def test_sparse_params_by_method():
	assert isinstance(sparse_params(MethodEnum.stlsq, {}), StlsqParams)
	assert isinstance(sparse_params(MethodEnum.sindy, {'optimizer': 'sr3', 'thresholder': 'l1'}), Sr3Params)
	assert isinstance(sparse_params(MethodEnum.sindy, {}), StlsqParams)
	assert sparse_params(MethodEnum.omp, {'n_nonzero': 2}).n_nonzero == 2


@pytest.mark.parametrize(
	'method,block,error',
	[
		(MethodEnum.omp, {}, ValidationError),
		(MethodEnum.stlsq, {'nu': 1.0}, ValidationError),
		(MethodEnum.sr3, {'thresholder': 'l2'}, ValidationError),
		(MethodEnum.stlsq, {'threshold': -1.0}, ValidationError),
		(MethodEnum.stlsq, {'library': {'degree': 2}}, ValidationError),
		(MethodEnum.stlsq, {'optimizer': 'omp'}, ValueError),
		(MethodEnum.gpsr, {}, ValueError),
	],
)
def test_sparse_params_rejects_mismatches(method, block, error):
	with pytest.raises(error):
		sparse_params(method, block)


def test_omp_params_missing_key_is_named():
	with pytest.raises(ValidationError) as e:
		sparse_params(MethodEnum.omp, {})
	assert e.value.errors()[0]['loc'] == ('omp', 'n_nonzero')


def test_stlsq_recovers_sparse_truth(regression_problem):
	theta, y = regression_problem
	model = stlsq(theta, y, threshold=0.1, alpha=0.0)
	assert model.coefficients[:, 0] == pytest.approx(TRUE_COEF, abs=1e-10)
	assert np.array_equal(model.support[:, 0], TRUE_COEF != 0)
	assert model.converged == [True]
	assert model.rank_deficient == [False]


def test_stlsq_result_is_a_fixed_point(regression_problem):
	"""Refitting the returned support reproduces the coefficients and every survivor clears the threshold"""
	theta, y = regression_problem
	noisy = y + np.random.default_rng(3).normal(scale=0.05, size=y.size)
	model = stlsq(theta, noisy, threshold=0.1, alpha=0.0)
	coef = model.coefficients[:, 0]
	support = coef != 0
	refit, *_ = np.linalg.lstsq(theta[:, support], noisy, rcond=None)
	assert coef[support] == pytest.approx(refit, abs=1e-10)
	assert np.all(np.abs(coef[support]) >= 0.1)


def test_stlsq_scales_with_target_and_threshold(regression_problem):
	theta, y = regression_problem
	noisy = y + np.random.default_rng(4).normal(scale=0.05, size=y.size)
	base = stlsq(theta, noisy, threshold=0.1, alpha=0.0)
	scaled = stlsq(theta, 3.7 * noisy, threshold=0.37, alpha=0.0)
	assert np.array_equal(scaled.support, base.support)
	assert scaled.coefficients == pytest.approx(3.7 * base.coefficients, rel=1e-10, abs=1e-12)


def test_stlsq_threshold_above_everything(regression_problem):
	theta, y = regression_problem
	model = stlsq(theta, y, threshold=10.0)
	assert not model.support.any()


def test_stlsq_flags_rank_deficiency(regression_problem):
	theta, y = regression_problem
	duplicated = np.column_stack([theta, theta[:, 0]])
	model = stlsq(duplicated, y, threshold=0.1, alpha=0.0)
	assert model.rank_deficient == [True]


def test_stlsq_normalized_columns_threshold_in_scaled_space(regression_problem):
	"""A small coefficient on a large column survives only when thresholding normalized values"""
	theta, _ = regression_problem
	scaled = theta.copy()
	scaled[:, 1] *= 100.0
	y = scaled @ np.array([1.5, 0.05, -2.0, 0.0, 0.0])
	plain = stlsq(scaled, y, threshold=0.1, alpha=0.0)
	normalized = stlsq(scaled, y, threshold=0.1, alpha=0.0, normalize_columns=True)
	assert plain.coefficients[1, 0] == 0.0
	assert normalized.coefficients[1, 0] == pytest.approx(0.05)


def test_input_shapes_checked(regression_problem):
	theta, y = regression_problem
	with pytest.raises(DimensionError):
		stlsq(theta, y[:-1], threshold=0.1)
	with pytest.raises(LibraryError):
		stlsq(np.zeros((200, 0)), y, threshold=0.1)


@pytest.mark.parametrize('thresholder', ['l0', 'l1'])
def test_sr3_recovers_sparse_truth(regression_problem, thresholder):
	theta, y = regression_problem
	model = sr3(theta, y, threshold=0.1, thresholder=thresholder)
	assert np.array_equal(model.support[:, 0], TRUE_COEF != 0)
	assert model.coefficients[:, 0] == pytest.approx(TRUE_COEF, abs=1e-8)
	assert model.converged == [True]


def test_sr3_without_unbias_shrinks_l1(regression_problem):
	theta, y = regression_problem
	model = sr3(theta, y, threshold=0.1, nu=1.0, thresholder='l1', unbias=False)
	assert abs(model.coefficients[0, 0]) < 1.5


def test_sr3_iteration_cap_is_flagged(regression_problem):
	"""Soft thresholding moves U away from the least-squares start, two sweeps cannot settle it"""
	theta, y = regression_problem
	noisy = y + np.random.default_rng(1).normal(scale=0.1, size=y.size)
	model = sr3(theta, noisy, threshold=1.0, nu=1.0, thresholder='l1', tol=1e-12, max_iter=2)
	assert model.converged == [False]
	assert model.iterations == [2]


def test_omp_recovers_sparse_truth(regression_problem):
	theta, y = regression_problem
	model = omp(theta, y, n_nonzero=2)
	assert model.coefficients[:, 0] == pytest.approx(TRUE_COEF, abs=1e-10)


def test_omp_stops_when_residual_vanishes(regression_problem):
	theta, _ = regression_problem
	model = omp(theta, 3.0 * theta[:, 2], n_nonzero=4)
	assert model.iterations == [1]
	assert np.count_nonzero(model.coefficients) == 1


def test_omp_skips_negligible_terms():
	"""A second term whose refit coefficient sits at rounding level is not added"""
	theta = np.random.default_rng(2).normal(size=(100, 4))
	model = omp(theta, theta[:, 0] + 1e-9 * theta[:, 1], n_nonzero=2)
	assert model.iterations == [1]
	assert np.count_nonzero(model.coefficients) == 1


def test_omp_with_every_term_is_least_squares(regression_problem):
	theta, _ = regression_problem
	y = np.random.default_rng(5).normal(size=theta.shape[0])
	model = omp(theta, y, n_nonzero=theta.shape[1])
	expected, *_ = np.linalg.lstsq(theta, y, rcond=None)
	assert model.coefficients[:, 0] == pytest.approx(expected, abs=1e-8)


def test_omp_finds_two_term_support():
	"""50 samples, 10 candidates, target 2*col3 - col7"""
	theta = np.random.default_rng(7).normal(size=(50, 10))
	model = omp(theta, 2.0 * theta[:, 3] - theta[:, 7], n_nonzero=2)
	assert np.flatnonzero(model.coefficients[:, 0]).tolist() == [3, 7]
	assert model.coefficients[[3, 7], 0] == pytest.approx([2.0, -1.0], abs=1e-10)


def test_omp_n_nonzero_range(regression_problem):
	theta, y = regression_problem
	with pytest.raises(LibraryError):
		omp(theta, y, n_nonzero=6)


def test_threshold_scan_prefers_sparse_models(regression_problem):
	theta, y = regression_problem
	noisy = y + np.random.default_rng(1).normal(scale=1e-3, size=y.shape)
	model, curve = threshold_scan(theta, noisy, [0.0, 0.1, 1.0, 5.0], alpha=0.0)
	assert np.array_equal(model.support[:, 0], TRUE_COEF != 0)
	assert [threshold for threshold, _, _ in curve] == [0.0, 0.1, 1.0, 5.0]
	assert curve[0][2] == 5
	assert curve[-1][2] == 0


def test_sparse_model_shape_checks():
	with pytest.raises(ValidationError):
		SparseModel(coefficients=np.zeros((3, 2)), optimizer='stlsq', term_names=['a', 'b'])


def test_model_to_expressions_orders_and_signs():
	model = SparseModel(
		coefficients=[[0.0, 0.1], [-0.3, 0.3], [0.0, 0.0]],
		optimizer='stlsq',
		term_names=['I', 'S*I', 'S'],
		variables=['S', 'I'],
	)
	first, second = model_to_expressions(model)
	assert format_expression(first, ['S', 'I']) == '-0.3*S*I'
	assert format_expression(second, ['S', 'I']) == '0.3*S*I + 0.1*I'
	assert model.to_table()[1] == {'term': 'S*I', 'S': -0.3, 'I': 0.3}


def test_model_to_expressions_empty_column():
	model = SparseModel(coefficients=[[0.0], [1e-12]], optimizer='omp', term_names=['a', 'a*a'], variables=['a'])
	assert model_to_expressions(model, zero_epsilon=1e-9)[0].value == 0.0


def test_lorenz_stlsq_recovery(lorenz_traj, lorenz_spec):
	"""Polynomial(2) library with threshold 0.2 recovers the Lorenz support within 2%"""
	model = fit(lorenz_traj, StlsqParams(threshold=0.2, alpha=1e-4, library=LibrarySpec(polynomial_degree=2)))
	for found, truth in zip(model_to_expressions(model), lorenz_spec.expressions):
		assert structural_match(found, truth, coeff_rtol=0.02) == MatchVerdict.exact_form
	assert np.count_nonzero(model.coefficients) == 7


@pytest.mark.parametrize('system_id', ['sir', 'sis'])
def test_epidemic_stlsq_coefficients(system_id):
	"""The {x, x*y} library reproduces SIR and SIS within 2%"""
	spec = builtin_spec(system_id)
	model = fit(simulate_system(spec), StlsqParams(threshold=0.05, alpha=1e-4))
	for found, truth in zip(model_to_expressions(model), spec.expressions):
		assert structural_match(found, truth, coeff_rtol=0.02) == MatchVerdict.exact_form


def test_sir_coefficients_by_term(sir_traj):
	model = fit(sir_traj, StlsqParams(threshold=0.05, alpha=1e-4))
	table = {row['term']: row for row in model.to_table()}
	assert table['S*I']['S'] == pytest.approx(-0.3, rel=0.02)
	assert table['S*I']['I'] == pytest.approx(0.3, rel=0.02)
	assert table['I']['I'] == pytest.approx(-0.1, rel=0.02)
	assert table['I']['R'] == pytest.approx(0.1, rel=0.02)
	assert table['R'] == {'term': 'R', 'S': 0.0, 'I': 0.0, 'R': 0.0}


def test_pendulum_sr3_recovery(pendulum_traj):
	"""Polynomial(1) and Fourier(1) with l1 SR3 at 0.4 recover -9.8*sin(theta) within 1%"""
	params = Sr3Params(
		threshold=0.4,
		thresholder='l1',
		library=LibrarySpec(polynomial_degree=1, fourier_frequencies=1),
	)
	model = fit(pendulum_traj, params)
	table = {row['term']: row for row in model.to_table()}
	assert table['omega']['theta'] == pytest.approx(1.0, rel=0.01)
	assert table['sin(theta)']['omega'] == pytest.approx(-9.8, rel=0.01)
	assert np.count_nonzero(model.coefficients) == 2


@pytest.mark.parametrize('system_id', list(LIBRARIES))
def test_stlsq_support_with_exact_derivatives(system_id, exact_trajectories):
	"""With the true vector field as target every system's support is recovered exactly"""
	spec = builtin_spec(system_id)
	model = fit(exact_trajectories(system_id), StlsqParams(threshold=0.05, alpha=0.0, library=LIBRARIES[system_id]))
	for found, truth in zip(model_to_expressions(model, zero_epsilon=1e-9), spec.expressions):
		assert structural_match(found, truth, coeff_rtol=1e-3) == MatchVerdict.exact_form


def test_seird_default_library_is_collinear(exact_trajectories):
	"""D columns duplicate R columns; without them dD/dt comes out as 0.1*I"""
	traj = exact_trajectories('seird')
	collinear = fit(traj, StlsqParams(threshold=0.05, alpha=0.0))
	assert all(collinear.rank_deficient)
	model = fit(traj, StlsqParams(threshold=0.05, alpha=0.0, library=LIBRARIES['seird']))
	table = {row['term']: row for row in model.to_table()}
	assert table['I']['D'] == pytest.approx(0.1, rel=1e-6)
	assert np.count_nonzero(model.coefficients[:, 4]) == 1


def test_seird_omp_recovered_rate(exact_trajectories):
	"""dR/dt = 1.0*I needs one term even when two are allowed"""
	model = fit(exact_trajectories('seird'), OmpParams(n_nonzero=2))
	table = {row['term']: row for row in model.to_table()}
	assert table['I']['R'] == pytest.approx(1.0, abs=1e-10)
	assert np.count_nonzero(model.coefficients[:, 3]) == 1


def test_fit_estimates_missing_derivatives(sir_traj):
	bare = sir_traj.replace(derivatives=None)
	model = fit(bare, OmpParams(n_nonzero=2))
	assert model.variables == ['S', 'I', 'R']
	assert model.term_names == ['S', 'I', 'R', 'S*I', 'S*R', 'I*R']
	assert all(np.count_nonzero(model.coefficients[:, j]) <= 2 for j in range(3))
	assert parse(model.term_names[3], model.variables) == model.terms[3]
