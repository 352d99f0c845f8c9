import numpy as np

from shared.logger import logger
from shared.models import MetricReport, SignificanceVerdict
from shared.settings import settings
from .metrics import inv_log_mae, mae, r2
from .wilcoxon import wilcoxon_signed_rank
from ..dynsys import SystemSpec, expressions_field, vector_field
from ..exceptions import DimensionError, IntegrationError
from ..exprcore import Expression, variable_indices
from ..odeint import dormand_prince


def _solve(fun, spec: SystemSpec, rtol, atol) -> tuple[np.ndarray, np.ndarray, bool]:
	try:
		times, states = dormand_prince(fun, spec.t_span, spec.initial_state, spec.dt, rtol=rtol, atol=atol)
		return times, states, False
	except IntegrationError as e:
		logger.info(f'{spec.id}: integration stopped at t={e.t_reached:.4g} ({e.reason})', extra={'system_id': spec.id})
		return e.partial_times, e.partial_states, True


def _test_indices(n_valid: int, n_test_points: int) -> np.ndarray:
	return np.unique(np.linspace(0, n_valid - 1, min(n_test_points, n_valid)).round().astype(int))


def trajectory_compare(
	spec: SystemSpec,
	recovered: list[Expression],
	rtol: float | None = None,
	atol: float | None = None,
	n_test_points: int | None = None,
) -> MetricReport:
	"""
	Integrate the true and the recovered system from the same initial state and score the difference.

	Both solutions are compared on n_test_points evenly spaced output times. When either
	integration stops early the comparison uses the common valid prefix and the report
	is flagged as diverged, which also rules out a non-significant verdict.

	Args:
	    spec (SystemSpec): ground-truth system with initial state, interval and dt
	    recovered (list[Expression]): one recovered right-hand side per state variable
	    rtol (float | None): integrator relative tolerance
	    atol (float | None): integrator absolute tolerance
	    n_test_points (int | None): sample size of the comparison, settings.WILCOXON_POINTS when None

	Returns:
	    MetricReport: per-variable MAE, R2 and Wilcoxon p plus the overall verdict
	"""
	if len(recovered) != spec.dimension:
		raise DimensionError('one recovered expression per state variable is needed', spec.dimension, len(recovered))
	for expr in recovered:
		if any(index >= spec.dimension for index in variable_indices(expr)):
			raise DimensionError('recovered expression uses an unknown state variable', spec.dimension, len(recovered))
	n_test_points = settings.WILCOXON_POINTS if n_test_points is None else n_test_points

	truth_times, truth_states, truth_stopped = _solve(vector_field(spec), spec, rtol, atol)
	_, found_states, found_stopped = _solve(expressions_field(recovered), spec, rtol, atol)
	n_valid = min(len(truth_states), len(found_states))
	diverged = truth_stopped or found_stopped

	if n_valid < 2:
		n_vars = spec.dimension
		return MetricReport(
			variables=spec.variables,
			mae=[np.inf] * n_vars,
			r2=[-np.inf] * n_vars,
			inv_log_mae=0.0,
			wilcoxon_p=[0.0] * n_vars,
			verdict=SignificanceVerdict.significant,
			diverged=True,
			t_end=float(truth_times[0]),
			n_points=n_valid,
		)

	rows = _test_indices(n_valid, n_test_points)
	truth, found = truth_states[rows], found_states[rows]
	mae_values = [mae(found[:, j], truth[:, j]) for j in range(spec.dimension)]
	r2_values = [r2(found[:, j], truth[:, j]) for j in range(spec.dimension)]
	p_values = [wilcoxon_signed_rank(found[:, j], truth[:, j]).pvalue for j in range(spec.dimension)]

	nonsignificant = not diverged and all(p > settings.WILCOXON_ALPHA for p in p_values)
	return MetricReport(
		variables=spec.variables,
		mae=mae_values,
		r2=r2_values,
		inv_log_mae=inv_log_mae(float(np.mean(mae_values))),
		wilcoxon_p=p_values,
		verdict=SignificanceVerdict.no_difference if nonsignificant else SignificanceVerdict.significant,
		diverged=diverged,
		t_end=float(truth_times[n_valid - 1]),
		n_points=int(rows.size),
	)
