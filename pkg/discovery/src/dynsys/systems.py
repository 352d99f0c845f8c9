import math
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from shared.models import SystemId
from ..exceptions import DimensionError, DynamicsError, UnknownSystemError
from ..exprcore import Expression, evaluate_batch, parse


class SystemSpec(BaseModel):
	"""A named autonomous dynamical system with its simulation setup.

	Ground-truth right-hand sides are kept as expression text (the wire format) and
	parsed once on construction.
	"""

	model_config = ConfigDict(frozen=True, extra='forbid')

	id: str
	variables: list[str] = Field(min_length=1)
	equations: list[str]
	parameters: dict[str, float] = {}
	initial_state: list[float]
	t_span: tuple[float, float]
	dt: float = Field(gt=0)
	epidemic: bool = False

	_expressions: list[Expression] = PrivateAttr(default_factory=list)

	@model_validator(mode='after')
	def check_consistency(self):
		n = len(self.variables)
		if len(self.equations) != n or len(self.initial_state) != n:
			raise ValueError(
				f'{self.id}: {n} variables, {len(self.equations)} equations, {len(self.initial_state)} initial values'
			)
		if len(set(self.variables)) != n:
			raise ValueError(f'{self.id}: variable names must be unique')

		t0, t1 = self.t_span
		if not t1 > t0:
			raise ValueError(f'{self.id}: integration interval must satisfy t1 > t0')
		steps = (t1 - t0) / self.dt
		if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
			raise ValueError(f'{self.id}: dt={self.dt} does not divide [{t0}, {t1}] into whole steps')

		if self.epidemic:
			if any(not 0.0 <= x <= 1.0 for x in self.initial_state):
				raise ValueError(f'{self.id}: compartments must lie in [0, 1]')
			if abs(sum(self.initial_state) - 1.0) > 1e-9:
				raise ValueError(f'{self.id}: compartments must sum to 1')
		return self

	def model_post_init(self, __context) -> None:
		self._expressions = [parse(text, self.variables) for text in self.equations]

	@property
	def expressions(self) -> list[Expression]:
		return list(self._expressions)

	@property
	def dimension(self) -> int:
		return len(self.variables)

	@property
	def n_steps(self) -> int:
		t0, t1 = self.t_span
		return int(round((t1 - t0) / self.dt))

	@property
	def times(self) -> np.ndarray:
		return self.t_span[0] + self.dt * np.arange(self.n_steps + 1)


def rhs(spec: SystemSpec, state, t: float = 0.0) -> np.ndarray:
	"""
	Evaluate the ground-truth right-hand side at one state.

	Args:
	    spec (SystemSpec): the system
	    state (array-like): one value per state variable
	    t (float): time, unused since every system is autonomous

	Returns:
	    np.ndarray: the time derivative of each variable
	"""
	state = np.asarray(state, dtype=float)
	if state.shape != (spec.dimension,):
		raise DimensionError('state length does not match the system', spec.dimension, state.size, system_id=spec.id)
	return np.array([evaluate_batch(expr, state)[0] for expr in spec.expressions])


def expressions_field(expressions: list[Expression]) -> Callable[[float, np.ndarray], np.ndarray]:
	"""Right-hand sides given as expressions, one per state variable, as f(t, y) for the integrator."""
	expressions = list(expressions)

	def f(t: float, y: np.ndarray) -> np.ndarray:
		point = y.reshape(1, -1)
		return np.array([evaluate_batch(expr, point)[0] for expr in expressions])

	return f


def vector_field(spec: SystemSpec) -> Callable[[float, np.ndarray], np.ndarray]:
	"""Right-hand side of a system as f(t, y) for the integrator."""
	return expressions_field(spec.expressions)


def r0(spec: SystemSpec) -> float:
	"""Basic reproduction number beta / gamma of an epidemic system."""
	if not spec.epidemic or 'beta' not in spec.parameters or 'gamma' not in spec.parameters:
		raise DynamicsError(f'{spec.id} is not an epidemic system with beta and gamma', system_id=spec.id)
	return spec.parameters['beta'] / spec.parameters['gamma']


def _lorenz() -> SystemSpec:
	sigma, rho, beta = 2.0, 1.0, 2.6
	return SystemSpec(
		id=SystemId.lorenz.value,
		variables=['x', 'y', 'z'],
		equations=[f'{sigma!r}*(y - x)', f'x*({rho!r} - z) - y', f'x*y - {beta!r}*z'],
		parameters={'sigma': sigma, 'rho': rho, 'beta': beta},
		initial_state=[0.6, 2.0, 1.0],
		t_span=(0.0, 5.0),
		dt=2e-3,
	)


def _pendulum() -> SystemSpec:
	g, length = 9.8, 1.0
	return SystemSpec(
		id=SystemId.pendulum.value,
		variables=['theta', 'omega'],
		equations=['omega', f'{-g / length!r}*sin(theta)'],
		parameters={'g': g, 'L': length},
		# 45 degrees released from rest
		initial_state=[math.radians(45.0), 0.0],
		t_span=(0.0, 5.0),
		dt=2e-3,
	)


def _lotka_volterra() -> SystemSpec:
	alpha, beta, gamma, delta = 2.0, 0.5, 1.0, 0.375
	return SystemSpec(
		id=SystemId.lotka_volterra.value,
		variables=['u', 'v'],
		equations=[f'{alpha!r}*u - {beta!r}*u*v', f'-{gamma!r}*v + {delta!r}*u*v'],
		parameters={'alpha': alpha, 'beta': beta, 'gamma': gamma, 'delta': delta},
		initial_state=[20.0, 5.0],
		t_span=(0.0, 7.5),
		dt=0.1,
	)


def _sis() -> SystemSpec:
	beta, gamma = 0.3, 0.1
	return SystemSpec(
		id=SystemId.sis.value,
		variables=['S', 'I'],
		equations=[f'-{beta!r}*S*I + {gamma!r}*I', f'{beta!r}*S*I - {gamma!r}*I'],
		parameters={'beta': beta, 'gamma': gamma},
		initial_state=[0.999, 0.001],
		t_span=(0.0, 100.0),
		dt=2e-3,
		epidemic=True,
	)


def _sir() -> SystemSpec:
	beta, gamma = 0.3, 0.1
	return SystemSpec(
		id=SystemId.sir.value,
		variables=['S', 'I', 'R'],
		equations=[f'-{beta!r}*S*I', f'{beta!r}*S*I - {gamma!r}*I', f'{gamma!r}*I'],
		parameters={'beta': beta, 'gamma': gamma},
		initial_state=[0.999, 0.001, 0.0],
		t_span=(0.0, 100.0),
		dt=2e-3,
		epidemic=True,
	)


def _seir() -> SystemSpec:
	beta, sigma, gamma = 0.3, 0.2, 1.0
	return SystemSpec(
		id=SystemId.seir.value,
		variables=['S', 'E', 'I', 'R'],
		equations=[
			f'-{beta!r}*S*I',
			f'{beta!r}*S*I - {sigma!r}*E',
			f'{sigma!r}*E - {gamma!r}*I',
			f'{gamma!r}*I',
		],
		parameters={'beta': beta, 'sigma': sigma, 'gamma': gamma},
		initial_state=[0.999, 0.0, 0.001, 0.0],
		t_span=(0.0, 160.0),
		dt=1.0,
		epidemic=True,
	)


def _seird() -> SystemSpec:
	beta, sigma, gamma, mu = 0.3, 0.2, 1.0, 0.1
	return SystemSpec(
		id=SystemId.seird.value,
		variables=['S', 'E', 'I', 'R', 'D'],
		equations=[
			f'-{beta!r}*S*I',
			f'{beta!r}*S*I - {sigma!r}*E',
			f'{sigma!r}*E - {gamma + mu!r}*I',
			f'{gamma!r}*I',
			f'{mu!r}*I',
		],
		parameters={'beta': beta, 'sigma': sigma, 'gamma': gamma, 'mu': mu},
		initial_state=[0.999, 0.0, 0.001, 0.0, 0.0],
		t_span=(0.0, 100.0),
		dt=5e-2,
		epidemic=True,
	)


def _sirv() -> SystemSpec:
	beta, epsilon, gamma = 0.5, 0.5, 1.0
	return SystemSpec(
		id=SystemId.sirv.value,
		variables=['S', 'I', 'R', 'V'],
		equations=[
			f'-{beta!r}*S*I - {epsilon!r}*S',
			f'{beta!r}*S*I - {gamma!r}*I',
			f'{gamma!r}*I',
			f'{epsilon!r}*S',
		],
		parameters={'beta': beta, 'epsilon': epsilon, 'gamma': gamma},
		initial_state=[0.999, 0.001, 0.0, 0.0],
		t_span=(0.0, 100.0),
		dt=5e-2,
		epidemic=True,
	)


def _sirs() -> SystemSpec:
	beta, delta, gamma = 0.3, 0.2, 1.0
	return SystemSpec(
		id=SystemId.sirs.value,
		variables=['S', 'I', 'R'],
		equations=[
			f'-{beta!r}*S*I + {delta!r}*R',
			f'{beta!r}*S*I - {gamma!r}*I',
			f'{gamma!r}*I - {delta!r}*R',
		],
		parameters={'beta': beta, 'delta': delta, 'gamma': gamma},
		initial_state=[0.999, 0.001, 0.0],
		t_span=(0.0, 100.0),
		dt=5e-2,
		epidemic=True,
	)


BUILTIN_SYSTEMS: dict[str, Callable[[], SystemSpec]] = {
	SystemId.lorenz.value: _lorenz,
	SystemId.pendulum.value: _pendulum,
	SystemId.lotka_volterra.value: _lotka_volterra,
	SystemId.sis.value: _sis,
	SystemId.sir.value: _sir,
	SystemId.seir.value: _seir,
	SystemId.seird.value: _seird,
	SystemId.sirv.value: _sirv,
	SystemId.sirs.value: _sirs,
}


def builtin_spec(system_id: str) -> SystemSpec:
	"""
	Look up one of the nine benchmark systems.

	Args:
	    system_id (str): e.g. 'lorenz' or 'sir'

	Returns:
	    SystemSpec: the system with its ground truth and simulation setup

	Raises:
	    UnknownSystemError: listing the valid ids
	"""
	factory = BUILTIN_SYSTEMS.get(str(system_id))
	if factory is None:
		raise UnknownSystemError(str(system_id), list(BUILTIN_SYSTEMS))
	return factory()


def resolve_spec(system_id: str, custom_systems: list[SystemSpec] | None = None) -> SystemSpec:
	"""Find a system among user-defined specs first, then among the built-in ones."""
	for spec in custom_systems or []:
		if spec.id == system_id:
			return spec
	if system_id in BUILTIN_SYSTEMS:
		return builtin_spec(system_id)
	valid = [spec.id for spec in custom_systems or []] + list(BUILTIN_SYSTEMS)
	raise UnknownSystemError(system_id, valid)
