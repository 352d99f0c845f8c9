import numpy as np

from .trajectory import Trajectory
from ..exceptions import DifferentiationError, TrajectoryError


def finite_difference(traj: Trajectory) -> Trajectory:
	"""
	Estimate time derivatives with second-order finite differences.

	Interior points use the centered stencil, both endpoints the 3-point one-sided
	stencil, so the result has one derivative row per state row and is exact on
	quadratics in t.

	Args:
	    traj (Trajectory): uniformly sampled trajectory with at least 3 points

	Returns:
	    Trajectory: the same trajectory with derivatives attached
	"""
	if traj.n_samples < 3:
		raise DifferentiationError(
			f'need at least 3 time points for finite differences, got {traj.n_samples}', system_id=traj.system_id
		)
	derivatives = np.gradient(traj.states, traj.dt, axis=0, edge_order=2)
	return traj.replace(derivatives=derivatives)


def add_noise(traj: Trajectory, sigma: float, seed: int | None = None) -> Trajectory:
	"""
	Perturb states with i.i.d. Gaussian noise; derivatives are dropped and must be recomputed.

	Args:
	    traj (Trajectory): clean trajectory
	    sigma (float): standard deviation of the noise, 0 returns the input unchanged
	    seed (int | None): seed of the numpy generator

	Returns:
	    Trajectory: noisy trajectory carrying seed and noise level as provenance
	"""
	if sigma < 0:
		raise TrajectoryError(f'noise level must be non-negative, got {sigma}', system_id=traj.system_id)
	if sigma == 0:
		return traj
	rng = np.random.default_rng(seed)
	noisy = traj.states + rng.normal(0.0, sigma, size=traj.states.shape)
	return traj.replace(states=noisy, derivatives=None, seed=seed, noise=sigma)
