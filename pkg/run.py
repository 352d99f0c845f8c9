import functools
import sys
from pathlib import Path

from pydantic import ValidationError

from discovery.src.benchmark import load_config, load_records, run_benchmark
from discovery.src.exceptions import DiscoveryError, UsageError
from discovery.src.exprcore import format_expression
from discovery.src.process_discovery import discover_equations, discovery_report, method_params, write_generation_logs
from discovery.src.process_simulate import process_simulate
from discovery.src.summary import render_summary
from discovery.src.utils import describe_validation_error, load_trajectory, read_config_file, write_json
from shared.logger import logger
from shared.models import MethodEnum


def exit_codes(func):
	"""Usage errors exit with 2, any other domain error with 1, the message goes to stderr."""

	@functools.wraps(func)
	def wrapper(*args, **kwargs):
		try:
			return func(*args, **kwargs)
		except UsageError as e:
			print(f'usage error: {e.message}', file=sys.stderr)
			sys.exit(2)
		except DiscoveryError as e:
			print(f'error: {e.message}', file=sys.stderr)
			sys.exit(1)

	return wrapper


@exit_codes
def simulate(system: str, out: str, noise: float = 0.0, seed: int | None = None):
	"""
	Simulate a benchmark system and write its trajectory CSV plus the .deriv.csv companion.

	:param system: system id, e.g. lorenz or sir
	:param out: path of the trajectory CSV
	:param noise: standard deviation of Gaussian noise added to the states
	:param seed: seed of the noise
	"""
	traj = process_simulate(str(system), Path(out), noise=noise, seed=seed)
	logger.info(f'Wrote {traj.n_samples} samples of {system} to {out}')


@exit_codes
def discover(method: str, data: str, out: str | None = None, config: str | None = None):
	"""
	Recover the governing equations from a trajectory CSV.

	:param method: one of sindy, sindy.stlsq, sindy.sr3, sindy.omp, gpsr
	:param data: trajectory CSV with a t column, a .deriv.csv companion is used when present
	:param out: JSON file for expressions and diagnostics, defaults to <data>.<method>.json
	:param config: YAML or TOML file with the method parameters
	"""
	try:
		method = MethodEnum(method)
	except ValueError:
		raise UsageError(f'unknown method {method!r}, valid methods: {", ".join(m.value for m in MethodEnum)}')

	if config is not None and not Path(config).exists():
		raise UsageError(f'config file {config} does not exist')
	block = read_config_file(Path(config)) if config is not None else {}
	try:
		params = method_params(method, block)
	except ValidationError as e:
		raise UsageError(f'parameters do not fit {method.value}: {describe_validation_error(e)}')
	except ValueError as e:
		raise UsageError(str(e))

	data = Path(data)
	traj = load_trajectory(data)
	outcome = discover_equations(traj, params)

	for name, front in (outcome.fronts or {}).items():
		print(f'Pareto front d{name}/dt')
		print(front.to_table(traj.variables))
	for name, expr in zip(traj.variables, outcome.expressions):
		print(f'd{name}/dt = {format_expression(expr, traj.variables, 3)}')

	out = Path(out) if out is not None else data.with_name(f'{data.stem}.{method.value}.json')
	write_json(discovery_report(traj, method, outcome), out)
	write_generation_logs(outcome, out)


@exit_codes
def benchmark(config: str, force: bool = False):
	"""
	Run the system x method x seed matrix of a config file and render the summary.

	:param config: YAML or TOML benchmark config, e.g. benchmark.yaml
	:param force: recompute cells that already have a record file
	"""
	cfg = load_config(Path(config))
	records = run_benchmark(cfg, force=force)
	logger.info(f'{len(records)} records, summary in {cfg.output_path}')


@exit_codes
def report(records: str, out: str | None = None):
	"""
	Render summary.md, summary.csv and the charts from existing record files.

	:param records: directory with the record JSON files
	:param out: output directory, defaults to the parent of the records directory
	"""
	records_dir = Path(records)
	loaded = load_records(records_dir)
	if not loaded:
		raise UsageError(f'no record files in {records_dir}')
	print(render_summary(loaded, Path(out) if out is not None else records_dir.parent))


if __name__ == '__main__':
	from fire import Fire

	Fire({'simulate': simulate, 'discover': discover, 'benchmark': benchmark, 'report': report})
