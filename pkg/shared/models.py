import math
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from .settings import settings


class SystemId(str, Enum):
	lorenz = 'lorenz'
	pendulum = 'pendulum'
	lotka_volterra = 'lotka_volterra'
	sis = 'sis'
	sir = 'sir'
	seir = 'seir'
	seird = 'seird'
	sirv = 'sirv'
	sirs = 'sirs'


class MethodEnum(str, Enum):
	sindy = 'sindy'
	stlsq = 'sindy.stlsq'
	sr3 = 'sindy.sr3'
	omp = 'sindy.omp'
	gpsr = 'gpsr'

	@property
	def is_sparse(self) -> bool:
		return self != MethodEnum.gpsr


class MatchVerdict(str, Enum):
	exact_form = 'exact_form'
	form_only = 'form_only'
	mismatch = 'mismatch'

	@property
	def recovered(self) -> bool:
		return self in (MatchVerdict.exact_form, MatchVerdict.form_only)


class SignificanceVerdict(str, Enum):
	no_difference = 'no significant difference'
	significant = 'significant difference'


def _encode_float(value: float) -> float | str:
	# JSON has no inf/nan, keep them readable and loadable
	if math.isfinite(value):
		return value
	return str(value)


def _decode_float(value: Any) -> Any:
	if isinstance(value, str):
		return float(value)
	return value


class MetricReport(BaseModel):
	"""Trajectory comparison of a recovered system against its ground truth."""

	variables: list[str]
	mae: list[float]
	r2: list[float]
	inv_log_mae: float
	wilcoxon_p: list[float]
	verdict: SignificanceVerdict
	diverged: bool = False
	t_end: float
	n_points: int

	@field_validator('mae', 'r2', 'wilcoxon_p', mode='before')
	@classmethod
	def decode_list(cls, values: Any) -> Any:
		if isinstance(values, list):
			return [_decode_float(v) for v in values]
		return values

	@field_validator('inv_log_mae', mode='before')
	@classmethod
	def decode_value(cls, value: Any) -> Any:
		return _decode_float(value)

	@field_validator('mae')
	@classmethod
	def mae_non_negative(cls, values: list[float]) -> list[float]:
		if any(v < 0 for v in values):
			raise ValueError('MAE must be non-negative')
		return values

	@field_validator('r2')
	@classmethod
	def r2_at_most_one(cls, values: list[float]) -> list[float]:
		if any(v > 1.0 for v in values):
			raise ValueError('R2 cannot exceed 1')
		return values

	@field_validator('wilcoxon_p')
	@classmethod
	def p_in_unit_interval(cls, values: list[float]) -> list[float]:
		if any(not 0.0 <= v <= 1.0 for v in values):
			raise ValueError('p-values must lie in [0, 1]')
		return values

	@field_serializer('mae', 'r2', 'wilcoxon_p')
	def encode_list(self, values: list[float]) -> list[float | str]:
		return [_encode_float(v) for v in values]

	@field_serializer('inv_log_mae')
	def encode_value(self, value: float) -> float | str:
		return _encode_float(value)

	@property
	def nonsignificant(self) -> bool:
		return self.verdict == SignificanceVerdict.no_difference


class BenchmarkRecord(BaseModel):
	"""One cell of the system x method x seed matrix."""

	system: str
	method: MethodEnum
	seed: int
	variables: list[str] = []
	expressions: list[str] = []
	verdicts: list[MatchVerdict] = []
	checkmark: bool = False
	metrics: MetricReport | None = None
	error: str | None = None

	# timings go to timings.csv so the record file itself is reproducible
	wall_seconds: float = Field(0.0, exclude=True)

	@model_validator(mode='after')
	def checkmark_needs_recovered_forms(self):
		if self.checkmark and (not self.verdicts or not all(v.recovered for v in self.verdicts)):
			raise ValueError('checkmark requires every variable to be exact_form or form_only')
		return self

	@property
	def file_name(self) -> str:
		return record_file_name(self.system, self.method, self.seed)

	@property
	def diverged(self) -> bool:
		return self.metrics is not None and self.metrics.diverged

	@property
	def succeeded(self) -> bool:
		"""Checkmarked and the recovered model integrates over the whole interval."""
		return self.checkmark and self.error is None and not self.diverged


def record_file_name(system: str, method: MethodEnum, seed: int) -> str:
	return f'{system}__{MethodEnum(method).value}__seed{seed}.json'


class BenchConfig(BaseModel):
	"""Experiment matrix plus the per-method parameter blocks.

	Parameter blocks stay plain dictionaries here; the benchmark validates them into
	the optimizer and GP config models for every cell before anything runs.
	"""

	model_config = ConfigDict(extra='forbid')

	systems: list[str] = Field(min_length=1)
	methods: list[MethodEnum] = Field(min_length=1)
	seeds: list[int] = Field(min_length=1)
	output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
	match_rtol: float = Field(default_factory=lambda: settings.COEFF_RTOL, gt=0)
	wilcoxon_points: int = Field(default_factory=lambda: settings.WILCOXON_POINTS, ge=2)
	noise: float = Field(0.0, ge=0)
	max_workers: int = Field(default_factory=lambda: settings.CONCURRENT_TASKS, ge=1)

	# method id -> parameters, shared by all systems
	defaults: dict[MethodEnum, dict[str, Any]] = {}
	# system id -> method id -> parameters replacing the defaults key by key
	overrides: dict[str, dict[MethodEnum, dict[str, Any]]] = {}
	# user-defined systems in the same layout as the built-in ones
	custom_systems: list[dict[str, Any]] = []

	def method_block(self, system: str, method: MethodEnum) -> dict[str, Any]:
		block = dict(self.defaults.get(method, {}))
		block.update(self.overrides.get(system, {}).get(method, {}))
		return block

	@property
	def output_path(self) -> Path:
		path = Path(self.output_dir)
		if not path.exists():
			path.mkdir(parents=True, exist_ok=True)

		return path

	@property
	def records_path(self) -> Path:
		path = self.output_path / settings.RECORDS_DIR
		if not path.exists():
			path.mkdir(parents=True, exist_ok=True)

		return path

	@property
	def trajectory_path(self) -> Path:
		path = self.output_path / settings.TRAJECTORY_DIR
		if not path.exists():
			path.mkdir(parents=True, exist_ok=True)

		return path
