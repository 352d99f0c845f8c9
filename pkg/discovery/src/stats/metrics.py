import math

import numpy as np

from shared.settings import settings
from ..exceptions import DimensionError


def _pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
	pred = np.asarray(pred, dtype=float).reshape(-1)
	truth = np.asarray(truth, dtype=float).reshape(-1)
	if pred.size != truth.size:
		raise DimensionError('prediction and truth lengths differ', truth.size, pred.size)
	if truth.size < 2:
		raise DimensionError('metrics need at least two samples', 2, truth.size)
	return pred, truth


def mae(pred, truth) -> float:
	"""Mean absolute error."""
	pred, truth = _pair(pred, truth)
	return float(np.mean(np.abs(pred - truth)))


def r2(pred, truth) -> float:
	"""
	Coefficient of determination about the mean of truth.

	A constant truth vector gives 1 for a perfect prediction and -inf otherwise.
	"""
	pred, truth = _pair(pred, truth)
	ss_res = float(np.sum((truth - pred) ** 2))
	ss_tot = float(np.sum((truth - truth.mean()) ** 2))
	if ss_tot == 0.0:
		return 1.0 if ss_res == 0.0 else -math.inf
	return 1.0 - ss_res / ss_tot


def inv_log_mae(mae_value: float) -> float:
	"""|1/ln(MAE)| with 0 for MAE = 0 and +inf for MAE = 1."""
	if mae_value < 0:
		raise ValueError(f'MAE must be non-negative, got {mae_value}')
	if mae_value == 0.0 or math.isinf(mae_value):
		return 0.0
	if mae_value == 1.0:
		return math.inf
	return abs(1.0 / math.log(mae_value))


def capped_inv_log_mae(value: float) -> float:
	"""Value shown in charts, the +inf sentinel is drawn at INV_LOG_MAE_CAP."""
	return min(value, settings.INV_LOG_MAE_CAP)


def capped_r2(value: float) -> float:
	"""Value shown in charts, floored at R2_FLOOR."""
	if math.isnan(value):
		return settings.R2_FLOOR
	return max(value, settings.R2_FLOOR)
