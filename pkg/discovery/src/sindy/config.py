from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from shared.models import MethodEnum


# the epidemic library {x, x*y} is used when no generator is configured
DEFAULT_CUSTOM_TERMS = ['x', 'x*y']


class LibrarySpec(BaseModel):
	"""Term generators of the candidate library.

	Custom terms are templates over the placeholders x, y, z which are bound to
	every combination of distinct state variables, so 'x*y' on (S, I, R) yields
	S*I, S*R and I*R.
	"""

	model_config = ConfigDict(extra='forbid')

	polynomial_degree: int = Field(0, ge=0)
	include_bias: bool = True
	fourier_frequencies: int = Field(0, ge=0)
	custom: list[str] = []
	pairwise: bool = False
	exclude: list[str] = []

	@model_validator(mode='after')
	def default_terms(self):
		if self.polynomial_degree == 0 and self.fourier_frequencies == 0 and not self.custom:
			self.custom = list(DEFAULT_CUSTOM_TERMS)
		return self


class StlsqParams(BaseModel):
	model_config = ConfigDict(extra='forbid')

	optimizer: Literal['stlsq'] = 'stlsq'
	threshold: float = Field(0.05, ge=0)
	alpha: float = Field(1e-4, ge=0)
	max_iter: int = Field(20, ge=1)
	normalize_columns: bool = False
	unbias: bool = False
	library: LibrarySpec = Field(default_factory=LibrarySpec)


class Sr3Params(BaseModel):
	model_config = ConfigDict(extra='forbid')

	optimizer: Literal['sr3'] = 'sr3'
	threshold: float = Field(0.1, ge=0)
	nu: float = Field(1.0, gt=0)
	tol: float = Field(1e-6, gt=0)
	thresholder: Literal['l0', 'l1'] = 'l0'
	max_iter: int = Field(1000, ge=1)
	normalize_columns: bool = False
	unbias: bool = True
	library: LibrarySpec = Field(default_factory=LibrarySpec)


class OmpParams(BaseModel):
	model_config = ConfigDict(extra='forbid')

	optimizer: Literal['omp'] = 'omp'
	n_nonzero: int = Field(ge=1)
	normalize_columns: bool = False
	library: LibrarySpec = Field(default_factory=LibrarySpec)


SparseParams = Annotated[Union[StlsqParams, Sr3Params, OmpParams], Field(discriminator='optimizer')]

_SPARSE_PARAMS = TypeAdapter(SparseParams)

_OPTIMIZER_OF_METHOD = {
	MethodEnum.stlsq: 'stlsq',
	MethodEnum.sr3: 'sr3',
	MethodEnum.omp: 'omp',
}


def sparse_params(method: MethodEnum, block: dict[str, Any] | None = None) -> StlsqParams | Sr3Params | OmpParams:
	"""
	Validate a parameter block for one of the sparse methods.

	The optimizer is implied by 'sindy.stlsq', 'sindy.sr3' and 'sindy.omp'; the combined
	'sindy' method reads it from the block's 'optimizer' key and falls back to STLSQ.

	Args:
	    method (MethodEnum): a sparse method id
	    block (dict | None): raw parameters from a config file

	Returns:
	    StlsqParams | Sr3Params | OmpParams: the validated parameters

	Raises:
	    pydantic.ValidationError: for unknown, missing or out-of-range keys
	    ValueError: when the block names an optimizer that contradicts the method
	"""
	method = MethodEnum(method)
	if not method.is_sparse:
		raise ValueError(f'{method.value} is not a sparse regression method')

	data = dict(block or {})
	implied = _OPTIMIZER_OF_METHOD.get(method)
	if implied is not None:
		if data.get('optimizer', implied) != implied:
			raise ValueError(f'{method.value} cannot run optimizer {data["optimizer"]!r}')
		data['optimizer'] = implied
	else:
		data.setdefault('optimizer', 'stlsq')
	return _SPARSE_PARAMS.validate_python(data)
