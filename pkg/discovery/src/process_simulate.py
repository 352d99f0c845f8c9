import time
from pathlib import Path

from shared.logger import logger
from .dynsys import SystemSpec, resolve_spec
from .odeint import Trajectory, add_noise, finite_difference, integrate
from .utils import save_trajectory


def simulate_system(spec: SystemSpec, noise: float = 0.0, seed: int | None = None) -> Trajectory:
	"""
	Integrate a system, optionally perturb the states and estimate derivatives.

	Args:
	    spec (SystemSpec): system to simulate
	    noise (float): standard deviation of Gaussian state noise
	    seed (int | None): seed of the noise

	Returns:
	    Trajectory: states and finite-difference derivatives
	"""
	t1 = time.time()
	traj = integrate(spec)
	traj = add_noise(traj, noise, seed)
	traj = finite_difference(traj)
	logger.info(
		f'Simulated {spec.id}: {traj.n_samples} samples in {time.time() - t1:.2f}s',
		extra={'system_id': spec.id},
	)
	return traj


def process_simulate(
	system_id: str,
	out: Path,
	noise: float = 0.0,
	seed: int | None = None,
	custom_systems: list[SystemSpec] | None = None,
) -> Trajectory:
	"""Simulate a built-in or user-defined system and write its trajectory and derivative CSV files."""
	spec = resolve_spec(system_id, custom_systems)
	traj = simulate_system(spec, noise, seed)
	save_trajectory(traj, Path(out))
	return traj
