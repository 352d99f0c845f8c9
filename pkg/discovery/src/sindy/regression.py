import numpy as np

from shared.logger import logger
from .config import OmpParams, Sr3Params, StlsqParams
from .library import build_library
from .model import SparseModel
from .optimizers import omp, refit_support, sr3, stlsq
from ..odeint import Trajectory, finite_difference


def fit(traj: Trajectory, params: StlsqParams | Sr3Params | OmpParams) -> SparseModel:
	"""
	Fit a sparse model Xdot ~ Theta(X) Xi to a trajectory.

	Derivatives are estimated by finite differences when the trajectory has none.

	Args:
	    traj (Trajectory): states, optionally with derivatives
	    params (StlsqParams | Sr3Params | OmpParams): optimizer and library settings

	Returns:
	    SparseModel: coefficients with term names and variable names attached
	"""
	if traj.derivatives is None:
		traj = finite_difference(traj)
	theta, terms = build_library(traj, params.library)
	xdot = traj.derivatives

	if isinstance(params, StlsqParams):
		model = stlsq(
			theta,
			xdot,
			params.threshold,
			alpha=params.alpha,
			max_iter=params.max_iter,
			normalize_columns=params.normalize_columns,
		)
		if params.unbias:
			coefficients = refit_support(theta, xdot, model.coefficients)
			residuals = np.linalg.norm(theta @ coefficients - xdot, axis=0).tolist()
			model = SparseModel(**{**dict(model), 'coefficients': coefficients, 'residuals': residuals})
	elif isinstance(params, Sr3Params):
		model = sr3(
			theta,
			xdot,
			params.threshold,
			nu=params.nu,
			tol=params.tol,
			thresholder=params.thresholder,
			max_iter=params.max_iter,
			normalize_columns=params.normalize_columns,
			unbias=params.unbias,
		)
	else:
		model = omp(theta, xdot, params.n_nonzero, normalize_columns=params.normalize_columns)

	if any(model.rank_deficient):
		logger.warning(
			f'Rank-deficient library for {traj.system_id or "trajectory"}, used minimum-norm least squares',
			extra={'system_id': traj.system_id},
		)
	return model.named(terms, traj.variables)
