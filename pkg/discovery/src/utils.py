import csv
import json
import re
try:
	import tomllib
except ModuleNotFoundError:  # Python < 3.11
	import tomli as tomllib
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError

from shared.logger import logger
from .exceptions import HeaderError, NonMonotoneTimeError, RaggedRowError, TrajectoryFormatError
from .odeint import Trajectory


_NAME = re.compile(r'^[^\W\d]\w*$')


def derivative_path(path: Path) -> Path:
	"""Companion file holding the derivatives, 'lorenz.csv' -> 'lorenz.deriv.csv'."""
	path = Path(path)
	return path.with_name(f'{path.stem}.deriv{path.suffix or ".csv"}')


def _write_matrix(path: Path, variables: list[str], times: np.ndarray, values: np.ndarray):
	with open(path, 'w', newline='') as f:
		writer = csv.writer(f)
		writer.writerow(['t', *variables])
		for t, row in zip(times, values):
			writer.writerow([repr(float(t)), *(repr(float(v)) for v in row)])


def save_trajectory(traj: Trajectory, path: Path, derivatives: bool = True) -> Path:
	"""
	Write a trajectory as CSV with header 't,<var1>,...,<varn>'.

	Values are written with repr, which round-trips every float exactly. Derivatives,
	if present, go to the '.deriv.csv' companion file.

	Args:
	    traj (Trajectory): trajectory to save
	    path (Path): target CSV file, parent directories are created
	    derivatives (bool): also write the companion file when derivatives exist

	Returns:
	    Path: the path of the state file
	"""
	path = Path(path)
	path.parent.mkdir(parents=True, exist_ok=True)
	_write_matrix(path, traj.variables, traj.times, traj.states)
	if derivatives and traj.derivatives is not None:
		_write_matrix(derivative_path(path), traj.variables, traj.times, traj.derivatives)
	logger.info(f'Saved trajectory with {traj.n_samples} rows to {path}')
	return path


def _read_matrix(path: Path, variables: list[str] | None) -> tuple[list[str], np.ndarray, np.ndarray]:
	with open(path, newline='') as f:
		rows = list(csv.reader(f))
	if not rows:
		raise HeaderError('file is empty', str(path))

	header = [name.strip() for name in rows[0]]
	if len(header) < 2 or header[0] != 't':
		raise HeaderError('header must start with the time column "t" followed by variables', str(path))
	names = header[1:]
	if variables is not None:
		if len(variables) != len(names):
			raise HeaderError(f'{len(variables)} variable names given for {len(names)} columns', str(path))
		names = list(variables)
	invalid = [name for name in names if not _NAME.match(name) or name == 't']
	if invalid or len(set(names)) != len(names):
		raise HeaderError(f'invalid or duplicate variable names {invalid or names}', str(path))

	values = []
	for line, row in enumerate(rows[1:], start=2):
		if not row:
			continue
		if len(row) != len(header):
			raise RaggedRowError(f'line {line} has {len(row)} fields, header has {len(header)}', str(path))
		try:
			values.append([float(v) for v in row])
		except ValueError:
			raise TrajectoryFormatError(f'line {line} contains a non-numeric value', str(path))
	if len(values) < 2:
		raise TrajectoryFormatError('at least two data rows are required', str(path))

	matrix = np.array(values)
	times = matrix[:, 0]
	if np.any(np.diff(times) <= 0):
		raise NonMonotoneTimeError('time column is not strictly increasing', str(path))
	return names, times, matrix[:, 1:]


def load_trajectory(path: Path, variables: list[str] | None = None, system_id: str | None = None) -> Trajectory:
	"""
	Read a trajectory CSV, picking up the '.deriv.csv' companion when it exists.

	Args:
	    path (Path): CSV file written by save_trajectory or by any other tool
	    variables (list[str] | None): names replacing the header's variable names
	    system_id (str | None): provenance to attach

	Returns:
	    Trajectory: states and, when available, derivatives

	Raises:
	    HeaderError, RaggedRowError, NonMonotoneTimeError: for the respective defects
	"""
	path = Path(path)
	if not path.exists():
		raise TrajectoryFormatError('file does not exist', str(path))
	names, times, states = _read_matrix(path, variables)

	derivatives = None
	companion = derivative_path(path)
	if companion.exists():
		_, deriv_times, derivatives = _read_matrix(companion, names)
		if deriv_times.shape != times.shape or not np.array_equal(deriv_times, times):
			raise TrajectoryFormatError('derivative times differ from the state times', str(companion))
	return Trajectory(times=times, states=states, variables=names, derivatives=derivatives, system_id=system_id)


def read_config_file(path: Path) -> dict[str, Any]:
	"""Load a YAML or TOML configuration file into a dictionary."""
	path = Path(path)
	if path.suffix == '.toml':
		with open(path, 'rb') as f:
			data = tomllib.load(f)
	else:
		with open(path) as f:
			data = yaml.safe_load(f)
	return data or {}


def describe_validation_error(error: ValidationError) -> str:
	"""One line per offending key, e.g. 'n_nonzero: Field required'."""
	lines = []
	for detail in error.errors():
		location = '.'.join(str(part) for part in detail['loc']) or '<root>'
		lines.append(f'{location}: {detail["msg"]}')
	return '; '.join(lines)


def write_json(data: Any, path: Path):
	path = Path(path)
	path.parent.mkdir(parents=True, exist_ok=True)
	with open(path, 'w') as f:
		json.dump(data, f, indent=2)
		f.write('\n')
