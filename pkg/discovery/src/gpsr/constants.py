import numpy as np
from scipy.optimize import minimize

from .population import mse
from ..exprcore import Expression, constants, with_constants


def optimize_constants(expr: Expression, inputs, target, iters: int = 100) -> Expression:
	"""
	Refine the numeric constants of an expression with Nelder-Mead.

	The structure is left untouched and the result never has a larger MSE than the input.

	Args:
	    expr (Expression): expression whose constants are refined
	    inputs (array-like): one row per sample, one column per variable
	    target (array-like): value to regress per sample
	    iters (int): Nelder-Mead iteration budget

	Returns:
	    Expression: the expression with refined constants, or expr itself
	"""
	start = constants(expr)
	if not start:
		return expr
	inputs = np.asarray(inputs, dtype=float)
	target = np.asarray(target, dtype=float)

	def objective(values: np.ndarray) -> float:
		loss = mse(with_constants(expr, values), inputs, target)
		return loss if np.isfinite(loss) else np.finfo(float).max

	initial = objective(np.asarray(start))
	result = minimize(
		objective,
		np.asarray(start),
		method='Nelder-Mead',
		options={'maxiter': iters, 'xatol': 1e-10, 'fatol': 1e-16, 'adaptive': len(start) > 2},
	)
	if not result.fun < initial:
		return expr
	return with_constants(expr, result.x)
