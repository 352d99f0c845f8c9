from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..exceptions import TrajectoryError


def _frozen_array(values: Any) -> np.ndarray:
	array = np.array(values, dtype=float)
	array.setflags(write=False)
	return array


class Trajectory(BaseModel):
	"""Sampled time series on a uniform grid with optional time derivatives.

	Rows are time points and columns are state variables. Arrays are copied on
	construction and made read-only.
	"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	times: np.ndarray
	states: np.ndarray
	variables: list[str]
	derivatives: np.ndarray | None = None

	# provenance
	system_id: str | None = None
	seed: int | None = None
	noise: float = 0.0

	@field_validator('times', 'states', mode='before')
	@classmethod
	def as_array(cls, values: Any) -> np.ndarray:
		return _frozen_array(values)

	@field_validator('derivatives', mode='before')
	@classmethod
	def as_optional_array(cls, values: Any) -> np.ndarray | None:
		if values is None:
			return None
		return _frozen_array(values)

	@model_validator(mode='after')
	def check_shapes(self):
		if self.times.ndim != 1 or self.times.size < 2:
			raise TrajectoryError('times must be a vector with at least two entries')
		if self.states.ndim != 2 or self.states.shape != (self.times.size, len(self.variables)):
			raise TrajectoryError(
				f'states must have shape ({self.times.size}, {len(self.variables)}), got {self.states.shape}'
			)
		if self.derivatives is not None and self.derivatives.shape != self.states.shape:
			raise TrajectoryError(f'derivatives shape {self.derivatives.shape} differs from states {self.states.shape}')

		steps = np.diff(self.times)
		if np.any(steps <= 0):
			raise TrajectoryError('times must be strictly increasing')
		# uniform grid, up to the rounding of t0 + k*dt
		if not np.allclose(steps, self.dt, rtol=1e-9, atol=0.0):
			raise TrajectoryError('times must be sampled with a constant step')
		if not np.all(np.isfinite(self.states)):
			raise TrajectoryError('states contain non-finite values')
		return self

	@property
	def dt(self) -> float:
		return float((self.times[-1] - self.times[0]) / (self.times.size - 1))

	@property
	def n_samples(self) -> int:
		return int(self.times.size)

	@property
	def dimension(self) -> int:
		return len(self.variables)

	def replace(self, **changes) -> 'Trajectory':
		"""Validated copy with some fields replaced."""
		return Trajectory(**{**dict(self), **changes})
