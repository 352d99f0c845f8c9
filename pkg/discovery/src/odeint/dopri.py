from typing import Callable

import numpy as np

from shared.settings import settings
from .trajectory import Trajectory
from ..dynsys import SystemSpec, vector_field
from ..exceptions import IntegrationError


# Dormand-Prince 5(4) tableau
C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
	np.array([]),
	np.array([1 / 5]),
	np.array([3 / 40, 9 / 40]),
	np.array([44 / 45, -56 / 15, 32 / 9]),
	np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
	np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])

# difference between the 5th and embedded 4th order weights
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# quartic dense output, y(t + s*h) = y + h * (K.T @ P) @ [s, s^2, s^3, s^4]
P = np.array(
	[
		[1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
		[0, 0, 0, 0],
		[0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
		[0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
		[0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
		[0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
		[0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
	]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1 / 5


def _rms(values: np.ndarray) -> float:
	return float(np.sqrt(np.mean(values**2)))


def _initial_step(fun, t0, y0, f0, rtol, atol, max_step, span) -> float:
	scale = atol + np.abs(y0) * rtol
	d0 = _rms(y0 / scale)
	d1 = _rms(f0 / scale)
	h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
	f1 = fun(t0 + h0, y0 + h0 * f0)
	d2 = _rms((f1 - f0) / scale) / h0
	if d1 <= 1e-15 and d2 <= 1e-15:
		h1 = max(1e-6, h0 * 1e-3)
	else:
		h1 = (0.01 / max(d1, d2)) ** (1 / 5)
	return min(100 * h0, h1, span, max_step)


def dormand_prince(
	fun: Callable[[float, np.ndarray], np.ndarray],
	t_span: tuple[float, float],
	y0,
	dt: float,
	rtol: float | None = None,
	atol: float | None = None,
	max_step: float = np.inf,
	max_steps: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
	"""
	Integrate an autonomous or time-dependent ODE with adaptive Dormand-Prince 5(4)
	steps and sample the solution on the fixed grid t0, t0 + dt, ..., t1.

	Args:
	    fun (Callable): right-hand side f(t, y)
	    t_span (tuple[float, float]): integration interval
	    y0 (array-like): initial state
	    dt (float): output increment, must divide the interval
	    rtol (float | None): relative tolerance, settings.ODE_RTOL when None
	    atol (float | None): absolute tolerance, settings.ODE_ATOL when None
	    max_step (float): upper bound for the internal step size
	    max_steps (int | None): cap on attempted steps, settings.ODE_MAX_STEPS when None

	Returns:
	    tuple[np.ndarray, np.ndarray]: output times and states, one row per time

	Raises:
	    IntegrationError: on step-size underflow, non-finite derivatives, a blow-up past
	        settings.ODE_STATE_LIMIT or the step cap, carrying the grid points computed so far
	"""
	rtol = settings.ODE_RTOL if rtol is None else rtol
	atol = settings.ODE_ATOL if atol is None else atol
	max_steps = settings.ODE_MAX_STEPS if max_steps is None else max_steps
	if rtol <= 0 or atol <= 0:
		raise ValueError('rtol and atol must be positive')

	t0, t1 = float(t_span[0]), float(t_span[1])
	n_out = int(round((t1 - t0) / dt)) + 1
	t_out = t0 + dt * np.arange(n_out)
	t_out[-1] = t1

	y = np.array(y0, dtype=float)
	states = np.empty((n_out, y.size))
	states[0] = y
	filled = 1

	def fail(message: str, t: float):
		raise IntegrationError(message, t_reached=t, partial_times=t_out[:filled], partial_states=states[:filled])

	f = np.asarray(fun(t0, y), dtype=float)
	if not np.all(np.isfinite(f)):
		fail('non-finite derivative at the initial state', t0)

	h = _initial_step(fun, t0, y, f, rtol, atol, max_step, t1 - t0)
	K = np.empty((7, y.size))
	t = t0
	attempts = 0

	while t < t1:
		attempts += 1
		if attempts > max_steps:
			fail(f'more than {max_steps} steps', t)

		last = h >= t1 - t
		if last:
			h = t1 - t
		if h < 10 * np.spacing(max(abs(t), 1.0)):
			fail('step size underflow', t)

		K[0] = f
		for stage in range(1, 6):
			K[stage] = fun(t + C[stage] * h, y + h * (A[stage] @ K[:stage]))
		y_new = y + h * (B[:6] @ K[:6])
		t_new = t1 if last else t + h
		f_new = np.asarray(fun(t_new, y_new), dtype=float)
		K[6] = f_new

		if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
			h *= MIN_FACTOR
			continue

		scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
		error = _rms(h * (E @ K) / scale)
		if not np.isfinite(error):
			h *= MIN_FACTOR
			continue

		if error > 1.0:
			h *= max(MIN_FACTOR, SAFETY * error**ERROR_EXPONENT)
			continue

		if np.max(np.abs(y_new)) > settings.ODE_STATE_LIMIT:
			fail(f'state beyond {settings.ODE_STATE_LIMIT:g} after t = {t:.6g} (blow-up)', t)

		# dense output for every grid point inside the accepted step
		stop = int(np.searchsorted(t_out, t_new, side='right'))
		if stop > filled:
			s = (t_out[filled:stop] - t) / h
			powers = np.cumprod(np.repeat(s[:, None], 4, axis=1), axis=1)
			states[filled:stop] = y + h * powers @ (K.T @ P).T
			if t_out[stop - 1] == t_new:
				states[stop - 1] = y_new
			filled = stop

		t, y, f = t_new, y_new, f_new
		factor = MAX_FACTOR if error == 0 else min(MAX_FACTOR, SAFETY * error**ERROR_EXPONENT)
		h = min(h * factor, max_step)

	return t_out, states


def integrate(spec: SystemSpec, rtol: float | None = None, atol: float | None = None, **kwargs) -> Trajectory:
	"""
	Simulate a system from its initial state over its interval.

	Args:
	    spec (SystemSpec): the system to simulate
	    rtol (float | None): relative tolerance, settings.ODE_RTOL when None
	    atol (float | None): absolute tolerance, settings.ODE_ATOL when None

	Returns:
	    Trajectory: states on the system's output grid, no derivatives yet
	"""
	try:
		times, states = dormand_prince(
			vector_field(spec), spec.t_span, spec.initial_state, spec.dt, rtol=rtol, atol=atol, **kwargs
		)
	except IntegrationError as e:
		raise IntegrationError(
			e.reason,
			t_reached=e.t_reached,
			partial_times=e.partial_times,
			partial_states=e.partial_states,
			system_id=spec.id,
		) from e
	return Trajectory(times=times, states=states, variables=spec.variables, system_id=spec.id)
