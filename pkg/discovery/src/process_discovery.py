from pathlib import Path
from typing import Any, NamedTuple

from shared.logger import logger
from shared.models import MethodEnum
from shared.settings import settings
from .exprcore import Expression, format_expression
from .gpsr import GenerationStats, GpConfig, ParetoFront, evolve, write_generation_log
from .odeint import Trajectory, finite_difference
from .sindy import OmpParams, SparseModel, Sr3Params, StlsqParams, fit, model_to_expressions, sparse_params

MethodParams = StlsqParams | Sr3Params | OmpParams | GpConfig


class DiscoveryOutcome(NamedTuple):
	expressions: list[Expression]
	model: SparseModel | None = None
	fronts: dict[str, ParetoFront] | None = None
	logs: dict[str, list[GenerationStats]] | None = None


def method_params(method: MethodEnum, block: dict[str, Any] | None = None) -> MethodParams:
	"""
	Validate the parameter block of a method.

	Raises:
	    pydantic.ValidationError: for unknown, missing or out-of-range keys
	"""
	method = MethodEnum(method)
	if method == MethodEnum.gpsr:
		return GpConfig.model_validate(block or {})
	return sparse_params(method, block)


def discover_equations(traj: Trajectory, params: MethodParams) -> DiscoveryOutcome:
	"""
	Recover one right-hand side per state variable from a trajectory.

	Sparse methods fit all variables at once; GP runs one regression per variable with
	all states as inputs, applying the per-target overrides of the configuration.

	Args:
	    traj (Trajectory): states, derivatives are estimated when missing
	    params (MethodParams): validated parameters, the type selects the method

	Returns:
	    DiscoveryOutcome: recovered expressions plus the sparse model or the GP fronts and logs
	"""
	if traj.derivatives is None:
		traj = finite_difference(traj)

	if not isinstance(params, GpConfig):
		model = fit(traj, params)
		return DiscoveryOutcome(model_to_expressions(model, zero_epsilon=settings.COEFF_EPSILON), model=model)

	expressions, fronts, logs = [], {}, {}
	for j, name in enumerate(traj.variables):
		result = evolve(params.for_target(name), traj.states, traj.derivatives[:, j])
		found = format_expression(result.best, traj.variables, 3)
		logger.info(
			f'GP d{name}/dt = {found} after {len(result.log) - 1} generations',
			extra={'system_id': traj.system_id},
		)
		expressions.append(result.best)
		fronts[name] = result.front
		logs[name] = result.log
	return DiscoveryOutcome(expressions, fronts=fronts, logs=logs)


def discovery_report(traj: Trajectory, method: MethodEnum, outcome: DiscoveryOutcome) -> dict[str, Any]:
	"""JSON-ready summary of a discovery run with full-precision expressions and diagnostics."""
	report = {
		'method': MethodEnum(method).value,
		'variables': traj.variables,
		'expressions': [format_expression(expr, traj.variables) for expr in outcome.expressions],
		'display': [format_expression(expr, traj.variables, 3) for expr in outcome.expressions],
	}
	if outcome.model is not None:
		model = outcome.model
		report['diagnostics'] = {
			'optimizer': model.optimizer,
			'residuals': model.residuals,
			'iterations': model.iterations,
			'converged': model.converged,
			'rank_deficient': model.rank_deficient,
		}
		report['coefficients'] = model.to_table()
	if outcome.fronts:
		report['fronts'] = {
			name: [
				{
					'complexity': entry.complexity,
					'loss': entry.loss,
					'expression': format_expression(entry.expr, traj.variables),
				}
				for entry in front
			]
			for name, front in outcome.fronts.items()
		}
		report['generations'] = {name: len(log) - 1 for name, log in outcome.logs.items()}
	return report


def write_generation_logs(outcome: DiscoveryOutcome, out: Path) -> list[Path]:
	"""Write one generation log CSV per variable next to the discovery output."""
	out = Path(out)
	paths = []
	for name, log in (outcome.logs or {}).items():
		path = out.with_name(f'{out.stem}.{name}.generations.csv')
		write_generation_log(log, path)
		paths.append(path)
	return paths
