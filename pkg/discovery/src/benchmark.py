import csv
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from itertools import product
from pathlib import Path

import logfire
from pydantic import ValidationError
from tqdm import tqdm

from shared.logger import logger
from shared.models import BenchConfig, BenchmarkRecord, MethodEnum, record_file_name
from .dynsys import SystemSpec, resolve_spec
from .exceptions import CellError, ConfigError, DiscoveryError
from .exprcore import format_expression, structural_match
from .gpsr import GpConfig
from .odeint import Trajectory
from .process_discovery import MethodParams, discover_equations, method_params
from .process_simulate import simulate_system
from .stats import trajectory_compare
from .summary import render_summary
from .utils import describe_validation_error, read_config_file, save_trajectory


def load_config(path: Path) -> BenchConfig:
	"""
	Read and validate a benchmark configuration from YAML or TOML.

	Raises:
	    ConfigError: when the file is missing or any key is invalid
	"""
	path = Path(path)
	if not path.exists():
		raise ConfigError(f'config file {path} does not exist')
	try:
		return BenchConfig.model_validate(read_config_file(path))
	except ValidationError as e:
		raise ConfigError(f'invalid benchmark config {path}: {describe_validation_error(e)}')


def _custom_systems(cfg: BenchConfig) -> list[SystemSpec]:
	try:
		return [SystemSpec.model_validate(block) for block in cfg.custom_systems]
	except ValidationError as e:
		raise ConfigError(f'invalid custom system: {describe_validation_error(e)}')
	except DiscoveryError as e:
		raise ConfigError(f'invalid custom system: {e.message}')


def resolve_cells(cfg: BenchConfig) -> tuple[dict[str, SystemSpec], dict[tuple[str, MethodEnum], MethodParams]]:
	"""
	Validate every system id and every per-cell parameter block before anything runs.

	Raises:
	    ConfigError: naming the first offending system or block
	"""
	custom = _custom_systems(cfg)
	specs = {}
	for system in cfg.systems:
		try:
			specs[system] = resolve_spec(system, custom)
		except DiscoveryError as e:
			raise ConfigError(e.message)

	params = {}
	for system, method in product(cfg.systems, cfg.methods):
		block = cfg.method_block(system, method)
		try:
			params[(system, method)] = method_params(method, block)
		except ValidationError as e:
			raise ConfigError(f'{system}/{method.value}: {describe_validation_error(e)}', system_id=system)
		except ValueError as e:
			raise ConfigError(f'{system}/{method.value}: {e}', system_id=system)
	return specs, params


def process_cell(
	spec: SystemSpec,
	method: MethodEnum,
	seed: int,
	params: MethodParams,
	traj: Trajectory | None,
	cfg: BenchConfig,
) -> BenchmarkRecord:
	"""
	Run one system x method x seed cell: discover, compare structure, compare trajectories.

	Any failure ends up in the record's error field instead of propagating.
	"""
	t1 = time.time()
	with logfire.span('benchmark cell {system} {method} seed {seed}', system=spec.id, method=method.value, seed=seed):
		try:
			if traj is None:
				raise DiscoveryError('no training trajectory, the simulation failed')
			if isinstance(params, GpConfig):
				params = params.model_copy(update={'seed': seed})
			outcome = discover_equations(traj, params)
			verdicts = [
				structural_match(found, truth, coeff_rtol=cfg.match_rtol)
				for found, truth in zip(outcome.expressions, spec.expressions)
			]
			metrics = trajectory_compare(spec, outcome.expressions, n_test_points=cfg.wilcoxon_points)
			record = BenchmarkRecord(
				system=spec.id,
				method=method,
				seed=seed,
				variables=spec.variables,
				expressions=[format_expression(expr, spec.variables) for expr in outcome.expressions],
				verdicts=verdicts,
				checkmark=all(verdict.recovered for verdict in verdicts),
				metrics=metrics,
				wall_seconds=time.time() - t1,
			)
		except Exception as e:
			error = CellError(str(e), spec.id, method.value, seed)
			logger.error(error.message, extra={'system_id': spec.id, 'method': method.value, 'seed': seed})
			record = BenchmarkRecord(
				system=spec.id,
				method=method,
				seed=seed,
				variables=spec.variables,
				error=str(e),
				wall_seconds=time.time() - t1,
			)

	mark = '✓' if record.succeeded else '✗'
	logger.info(
		f'{spec.id} / {method.value} / seed {seed}: {mark} in {record.wall_seconds:.2f}s',
		extra={'system_id': spec.id, 'method': method.value, 'seed': seed},
	)
	return record


def _training_data(
	cfg: BenchConfig, specs: dict[str, SystemSpec], cells: list[tuple[str, MethodEnum, int]]
) -> dict[tuple[str, int | None], Trajectory | None]:
	"""Simulate every needed trajectory once, per seed only when noise is added."""
	data: dict[tuple[str, int | None], Trajectory | None] = {}
	for system, _, seed in cells:
		key = (system, seed if cfg.noise > 0 else None)
		if key in data:
			continue
		try:
			traj = simulate_system(specs[system], cfg.noise, seed if cfg.noise > 0 else None)
			name = system if key[1] is None else f'{system}__seed{seed}'
			save_trajectory(traj, cfg.trajectory_path / f'{name}.csv')
		except DiscoveryError as e:
			logger.error(f'Simulation of {system} failed: {e.message}', extra={'system_id': system})
			traj = None
		data[key] = traj
	return data


def load_records(records_dir: Path) -> list[BenchmarkRecord]:
	"""Read every record file of a records directory."""
	records = []
	for path in sorted(Path(records_dir).glob('*.json')):
		records.append(BenchmarkRecord.model_validate_json(path.read_text(encoding='utf-8')))
	return records


def write_timings(records: list[BenchmarkRecord], path: Path):
	with open(path, 'w', newline='') as f:
		writer = csv.writer(f)
		writer.writerow(['system', 'method', 'seed', 'wall_seconds'])
		for record in records:
			writer.writerow([record.system, record.method.value, record.seed, f'{record.wall_seconds:.3f}'])


def run_benchmark(cfg: BenchConfig, force: bool = False) -> list[BenchmarkRecord]:
	"""
	Run the full system x method x seed matrix.

	Cells whose record file already exists are skipped unless force is set. Cells run
	on a bounded thread pool; records are written as JSON per cell, timings of the
	cells run now go to timings.csv, and the summary is rendered after all cells joined.

	Args:
	    cfg (BenchConfig): validated configuration
	    force (bool): recompute cells that already have a record

	Returns:
	    list[BenchmarkRecord]: one record per cell in configuration order
	"""
	specs, params = resolve_cells(cfg)
	records_path = cfg.records_path
	cells = list(product(cfg.systems, cfg.methods, cfg.seeds))
	pending = [cell for cell in cells if force or not (records_path / record_file_name(*cell)).exists()]
	logger.info(f'Benchmark: {len(cells)} cells, {len(cells) - len(pending)} already done')

	finished: list[BenchmarkRecord] = []
	if pending:
		data = _training_data(cfg, specs, pending)
		with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
			futures = [
				pool.submit(
					process_cell,
					specs[system],
					method,
					seed,
					params[(system, method)],
					data[(system, seed if cfg.noise > 0 else None)],
					cfg,
				)
				for system, method, seed in pending
			]
			for future in tqdm(as_completed(futures), total=len(futures), desc='cells'):
				record = future.result()
				(records_path / record.file_name).write_text(record.model_dump_json(indent=2), encoding='utf-8')
				finished.append(record)
		order = {cell: i for i, cell in enumerate(cells)}
		finished.sort(key=lambda r: order[(r.system, r.method, r.seed)])
		write_timings(finished, cfg.output_path / 'timings.csv')

	records = []
	for system, method, seed in cells:
		text = (records_path / record_file_name(system, method, seed)).read_text(encoding='utf-8')
		records.append(BenchmarkRecord.model_validate_json(text))
	render_summary(records, cfg.output_path)
	return records
