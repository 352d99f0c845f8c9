from typing import Literal, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.linear_model import ridge_regression

from shared.logger import logger
from .model import SparseModel
from ..exceptions import DimensionError, LibraryError


def _check_inputs(theta, xdot) -> tuple[np.ndarray, np.ndarray]:
	theta = np.asarray(theta, dtype=float)
	xdot = np.asarray(xdot, dtype=float)
	if xdot.ndim == 1:
		xdot = xdot[:, None]
	if theta.ndim != 2 or xdot.ndim != 2:
		raise DimensionError('Theta and Xdot must be matrices', 2, min(theta.ndim, xdot.ndim))
	if theta.shape[0] != xdot.shape[0]:
		raise DimensionError('Theta and Xdot row counts differ', theta.shape[0], xdot.shape[0])
	if theta.shape[1] == 0:
		raise LibraryError('the candidate library is empty')
	return theta, xdot


def _column_norms(theta: np.ndarray, normalize: bool) -> np.ndarray:
	if not normalize:
		return np.ones(theta.shape[1])
	norms = np.linalg.norm(theta, axis=0)
	norms[norms == 0] = 1.0
	return norms


def _least_squares(theta: np.ndarray, y: np.ndarray, alpha: float = 0.0) -> tuple[np.ndarray, bool]:
	"""Ridge solve when alpha > 0, minimum-norm least squares otherwise; also reports rank deficiency."""
	if theta.shape[1] == 0:
		return np.zeros(0), False
	if alpha > 0:
		coef = ridge_regression(theta, y, alpha, solver='cholesky')
		rank = np.linalg.matrix_rank(theta)
	else:
		coef, _, rank, _ = np.linalg.lstsq(theta, y, rcond=None)
	return np.asarray(coef, dtype=float).reshape(-1), bool(rank < theta.shape[1])


def _residuals(theta: np.ndarray, xdot: np.ndarray, coefficients: np.ndarray) -> list[float]:
	return [float(v) for v in np.linalg.norm(theta @ coefficients - xdot, axis=0)]


def stlsq(
	theta,
	xdot,
	threshold: float,
	alpha: float = 1e-4,
	max_iter: int = 20,
	normalize_columns: bool = False,
) -> SparseModel:
	"""
	Sequentially thresholded least squares.

	Alternates a ridge solve on the active columns with zeroing every coefficient
	below the threshold until the active set stops changing. The ridge term only
	enters the solve, never the thresholding rule.

	Args:
	    theta (array-like): library matrix, one row per sample
	    xdot (array-like): derivatives, one column per state variable
	    threshold (float): sparsity threshold lambda
	    alpha (float): ridge weight, plain least squares when 0
	    max_iter (int): maximum number of solve/threshold rounds
	    normalize_columns (bool): fit on unit-norm columns and rescale the result;
	        the threshold then applies to the normalized coefficients

	Returns:
	    SparseModel: coefficients below the threshold are exactly zero
	"""
	theta, xdot = _check_inputs(theta, xdot)
	if threshold < 0 or alpha < 0:
		raise ValueError('threshold and alpha must be non-negative')
	norms = _column_norms(theta, normalize_columns)
	scaled = theta / norms

	coefficients = np.zeros((theta.shape[1], xdot.shape[1]))
	iterations, converged, deficient = [], [], []
	for j in range(xdot.shape[1]):
		y = xdot[:, j]
		active = np.ones(theta.shape[1], dtype=bool)
		coef = np.zeros(theta.shape[1])
		done, flagged, k = False, False, 0
		for k in range(1, max_iter + 1):
			coef = np.zeros(theta.shape[1])
			if not active.any():
				done = True
				break
			coef[active], rank_deficient = _least_squares(scaled[:, active], y, alpha)
			flagged = flagged or rank_deficient
			still_active = active & (np.abs(coef) >= threshold)
			if np.array_equal(still_active, active):
				done = True
				break
			active = still_active
		coef[np.abs(coef) < threshold] = 0.0
		coefficients[:, j] = coef / norms
		iterations.append(k)
		converged.append(done)
		deficient.append(flagged)

	if not all(converged):
		logger.warning(f'STLSQ active set still changing after {max_iter} iterations')
	return SparseModel(
		coefficients=coefficients,
		optimizer='stlsq',
		threshold=threshold,
		residuals=_residuals(theta, xdot, coefficients),
		iterations=iterations,
		converged=converged,
		rank_deficient=deficient,
	)


def _prox(values: np.ndarray, threshold: float, nu: float, thresholder: str) -> np.ndarray:
	if thresholder == 'l0':
		return values * (np.abs(values) >= np.sqrt(2 * threshold / nu))
	return np.sign(values) * np.maximum(np.abs(values) - threshold / nu, 0.0)


def sr3(
	theta,
	xdot,
	threshold: float,
	nu: float = 1.0,
	tol: float = 1e-6,
	thresholder: Literal['l0', 'l1'] = 'l0',
	max_iter: int = 1000,
	normalize_columns: bool = False,
	unbias: bool = True,
) -> SparseModel:
	"""
	Sparse relaxed regularized regression.

	Minimizes 0.5*||Xdot - Theta W||^2 + threshold*R(U) + nu/2*||W - U||^2 by
	alternating an exact solve for W with a proximal step for U: hard thresholding at
	sqrt(2*threshold/nu) for l0, soft thresholding at threshold/nu for l1. Iteration
	stops when U changes by less than tol.

	Args:
	    theta (array-like): library matrix, one row per sample
	    xdot (array-like): derivatives, one column per state variable
	    threshold (float): regularization weight lambda
	    nu (float): relaxation parameter
	    tol (float): stopping tolerance on the change of U
	    thresholder (str): 'l0' or 'l1'
	    max_iter (int): iteration cap; the last iterate is returned and flagged
	    normalize_columns (bool): fit on unit-norm columns and rescale the result
	    unbias (bool): refit the selected support with plain least squares

	Returns:
	    SparseModel: built from the sparse variable U
	"""
	theta, xdot = _check_inputs(theta, xdot)
	if nu <= 0 or tol <= 0:
		raise ValueError('nu and tol must be positive')
	if thresholder not in ('l0', 'l1'):
		raise ValueError(f'unknown thresholder {thresholder!r}')
	norms = _column_norms(theta, normalize_columns)
	scaled = theta / norms

	n_terms = theta.shape[1]
	factor = cho_factor(scaled.T @ scaled + nu * np.eye(n_terms))
	coefficients = np.zeros((n_terms, xdot.shape[1]))
	iterations, converged, deficient = [], [], []
	for j in range(xdot.shape[1]):
		y = xdot[:, j]
		projected = scaled.T @ y
		w, rank_deficient = _least_squares(scaled, y)
		u = _prox(w, threshold, nu, thresholder)
		done, k = False, 0
		for k in range(1, max_iter + 1):
			w = cho_solve(factor, projected + nu * u)
			u_next = _prox(w, threshold, nu, thresholder)
			change = float(np.max(np.abs(u_next - u)))
			u = u_next
			if change < tol:
				done = True
				break
		coefficients[:, j] = u
		iterations.append(k)
		converged.append(done)
		deficient.append(rank_deficient)

	if unbias:
		coefficients = refit_support(scaled, xdot, coefficients)
	coefficients = coefficients / norms[:, None]

	if not all(converged):
		logger.warning(f'SR3 did not converge within {max_iter} iterations')
	return SparseModel(
		coefficients=coefficients,
		optimizer='sr3',
		threshold=threshold,
		residuals=_residuals(theta, xdot, coefficients),
		iterations=iterations,
		converged=converged,
		rank_deficient=deficient,
	)


# OMP drops a new term whose contribution is below this share of the target norm
NEGLIGIBLE_SHARE = 1e-6


def omp(theta, xdot, n_nonzero: int, normalize_columns: bool = False) -> SparseModel:
	"""
	Orthogonal matching pursuit.

	Greedily adds the column with the largest normalized correlation to the residual,
	re-solves least squares on the selected columns, and stops after n_nonzero terms.
	It stops earlier once the residual vanishes or when the refit gives the newest term
	a contribution below NEGLIGIBLE_SHARE of the target norm; that term is not kept.

	Args:
	    theta (array-like): library matrix, one row per sample
	    xdot (array-like): derivatives, one column per state variable
	    n_nonzero (int): number of terms per state variable
	    normalize_columns (bool): fit on unit-norm columns and rescale the result

	Returns:
	    SparseModel: at most n_nonzero non-zero coefficients per column
	"""
	theta, xdot = _check_inputs(theta, xdot)
	n_terms = theta.shape[1]
	if not 1 <= n_nonzero <= n_terms:
		raise LibraryError(f'n_nonzero must lie in [1, {n_terms}], got {n_nonzero}')
	norms = _column_norms(theta, normalize_columns)
	scaled = theta / norms
	column_norms = np.linalg.norm(scaled, axis=0)
	selectable = column_norms > 0

	coefficients = np.zeros((n_terms, xdot.shape[1]))
	iterations, deficient = [], []
	for j in range(xdot.shape[1]):
		y = xdot[:, j]
		residual = y.copy()
		selected: list[int] = []
		coef = np.zeros(0)
		flagged = False
		y_norm = np.linalg.norm(y)
		while len(selected) < n_nonzero:
			if np.linalg.norm(residual) <= 1e-12 * max(y_norm, 1.0):
				break
			correlation = np.full(n_terms, -np.inf)
			correlation[selectable] = np.abs(scaled[:, selectable].T @ residual) / column_norms[selectable]
			correlation[selected] = -np.inf
			best = int(np.argmax(correlation))
			if not np.isfinite(correlation[best]):
				break
			candidate = selected + [best]
			coef_next, rank_deficient = _least_squares(scaled[:, candidate], y)
			if selected and abs(coef_next[-1]) * column_norms[best] <= NEGLIGIBLE_SHARE * y_norm:
				break
			selected, coef = candidate, coef_next
			flagged = flagged or rank_deficient
			residual = y - scaled[:, selected] @ coef
		coefficients[selected, j] = coef
		iterations.append(len(selected))
		deficient.append(flagged)

	coefficients = coefficients / norms[:, None]
	return SparseModel(
		coefficients=coefficients,
		optimizer='omp',
		residuals=_residuals(theta, xdot, coefficients),
		iterations=iterations,
		converged=[True] * xdot.shape[1],
		rank_deficient=deficient,
	)


def refit_support(theta, xdot, coefficients) -> np.ndarray:
	"""Least-squares refit of each column restricted to its current non-zero entries."""
	theta, xdot = _check_inputs(theta, xdot)
	refitted = np.zeros_like(np.asarray(coefficients, dtype=float))
	for j in range(xdot.shape[1]):
		support = np.asarray(coefficients)[:, j] != 0
		if support.any():
			refitted[support, j], _ = _least_squares(theta[:, support], xdot[:, j])
	return refitted


def threshold_scan(
	theta,
	xdot,
	thresholds: Sequence[float],
	complexity_weight: float = 1e-3,
	**kwargs,
) -> tuple[SparseModel, list[tuple[float, float, int]]]:
	"""
	Choose the STLSQ threshold along the error/sparsity curve.

	Every threshold is fitted; the winner minimizes relative residual plus
	complexity_weight times the number of active terms. Ties go to the larger threshold.

	Args:
	    theta (array-like): library matrix
	    xdot (array-like): derivatives
	    thresholds (Sequence[float]): candidate thresholds
	    complexity_weight (float): price of one active term
	    **kwargs: passed on to stlsq

	Returns:
	    tuple: the chosen model and (threshold, relative error, active terms) per candidate
	"""
	theta, xdot = _check_inputs(theta, xdot)
	if not thresholds:
		raise ValueError('threshold_scan needs at least one threshold')
	scale = max(float(np.linalg.norm(xdot)), np.finfo(float).tiny)

	curve = []
	best_model, best_score = None, np.inf
	for threshold in sorted(thresholds):
		model = stlsq(theta, xdot, threshold, **kwargs)
		error = float(np.linalg.norm(theta @ model.coefficients - xdot)) / scale
		n_active = int(np.count_nonzero(model.coefficients))
		curve.append((float(threshold), error, n_active))
		score = error + complexity_weight * n_active
		if score <= best_score:
			best_model, best_score = model, score
	return best_model, curve
