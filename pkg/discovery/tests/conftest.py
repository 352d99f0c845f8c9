import numpy as np
import pytest

from shared.models import MatchVerdict, MethodEnum, BenchmarkRecord, MetricReport, SignificanceVerdict
from shared.settings import settings
from discovery.src.dynsys import builtin_spec
from discovery.src.exprcore import evaluate_batch
from discovery.src.odeint import integrate
from discovery.src.process_simulate import simulate_system


def exact_derivatives(traj, spec):
	"""Attach the ground-truth right-hand side evaluated at every sample"""
	derivatives = np.column_stack([evaluate_batch(expr, traj.states) for expr in spec.expressions])
	return traj.replace(derivatives=derivatives)


@pytest.fixture(autouse=True)
def output_dir(tmp_path, mocker):
	"""Send everything the code writes by default to a temporary directory"""
	out = tmp_path / 'out'
	mocker.patch.object(settings, 'OUTPUT_DIR', str(out))
	return out


@pytest.fixture(scope='session')
def lorenz_spec():
	return builtin_spec('lorenz')


@pytest.fixture(scope='session')
def pendulum_spec():
	return builtin_spec('pendulum')


@pytest.fixture(scope='session')
def sir_spec():
	return builtin_spec('sir')


@pytest.fixture(scope='session')
def lorenz_traj(lorenz_spec):
	"""Noiseless Lorenz trajectory with finite-difference derivatives"""
	return simulate_system(lorenz_spec)


@pytest.fixture(scope='session')
def pendulum_traj(pendulum_spec):
	"""Noiseless pendulum trajectory with finite-difference derivatives"""
	return simulate_system(pendulum_spec)


@pytest.fixture(scope='session')
def sir_traj(sir_spec):
	"""Noiseless SIR trajectory with finite-difference derivatives"""
	return simulate_system(sir_spec)


@pytest.fixture(scope='session')
def exact_trajectories():
	"""Every built-in system with its exact right-hand side as derivatives, keyed by system id"""
	cache = {}

	def get(system_id: str):
		if system_id not in cache:
			spec = builtin_spec(system_id)
			cache[system_id] = exact_derivatives(integrate(spec), spec)
		return cache[system_id]

	return get


def make_report(nonsignificant: bool = True, diverged: bool = False, mae: float = 1e-4) -> MetricReport:
	return MetricReport(
		variables=['S', 'I'],
		mae=[mae, mae],
		r2=[0.99, 0.98],
		inv_log_mae=0.108,
		wilcoxon_p=[0.5, 0.4] if nonsignificant else [0.01, 0.4],
		verdict=SignificanceVerdict.no_difference if nonsignificant else SignificanceVerdict.significant,
		diverged=diverged,
		t_end=100.0,
		n_points=100,
	)


def make_record(
	system: str = 'sis',
	method: MethodEnum = MethodEnum.stlsq,
	seed: int = 0,
	checkmark: bool = True,
	nonsignificant: bool = True,
	diverged: bool = False,
	error: str | None = None,
) -> BenchmarkRecord:
	"""Record of a two-variable cell for rendering tests"""
	if error is not None:
		return BenchmarkRecord(system=system, method=method, seed=seed, variables=['S', 'I'], error=error)
	verdict = MatchVerdict.exact_form if checkmark else MatchVerdict.mismatch
	return BenchmarkRecord(
		system=system,
		method=method,
		seed=seed,
		variables=['S', 'I'],
		expressions=['-0.3*S*I + 0.1*I', '0.3*S*I - 0.1*I'],
		verdicts=[verdict, MatchVerdict.exact_form],
		checkmark=checkmark,
		metrics=make_report(nonsignificant, diverged),
	)
