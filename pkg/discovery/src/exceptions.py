class DiscoveryError(Exception):
	"""Base exception class for all discovery errors"""

	def __init__(self, message: str, system_id: str | None = None, method: str | None = None):
		self.message = message
		self.system_id = system_id
		self.method = method
		super().__init__(self.message)


class ExpressionError(DiscoveryError):
	"""Raised when an expression tree is malformed or cannot be evaluated"""


class ExpressionSyntaxError(ExpressionError):
	"""Raised when expression text cannot be parsed"""

	def __init__(self, message: str, column: int, text: str = '', **kwargs):
		self.column = column
		self.text = text
		super().__init__(f'syntax error at column {column}: {message}', **kwargs)


class NonCanonicalizableError(ExpressionError):
	"""Raised when an expression lies outside the polynomial-plus-transcendental normal form"""


class UnknownSystemError(DiscoveryError):
	"""Raised when a system id is not registered"""

	def __init__(self, system_id: str, valid_ids: list[str], **kwargs):
		self.valid_ids = valid_ids
		super().__init__(
			f'Unknown system {system_id!r}, valid ids: {", ".join(valid_ids)}', system_id=system_id, **kwargs
		)


class DimensionError(DiscoveryError):
	"""Raised when a state or expression list does not match the dimension of a system"""

	def __init__(self, message: str, expected: int, got: int, **kwargs):
		self.expected = expected
		self.got = got
		super().__init__(f'{message} (expected {expected}, got {got})', **kwargs)


class DynamicsError(DiscoveryError):
	"""Raised when a derived quantity is requested from a system that does not define it"""


class IntegrationError(DiscoveryError):
	"""Raised when the integrator cannot reach the end of the interval"""

	def __init__(self, message: str, t_reached: float, partial_times=None, partial_states=None, **kwargs):
		self.reason = message
		self.t_reached = t_reached
		self.partial_times = partial_times
		self.partial_states = partial_states
		super().__init__(f'Integration failed at t={t_reached:.6g}: {message}', **kwargs)


class DifferentiationError(DiscoveryError):
	"""Raised when derivatives cannot be estimated from a trajectory"""


class LibraryError(DiscoveryError):
	"""Raised when a candidate library is empty or inconsistent"""


class TrajectoryError(DiscoveryError):
	"""Raised when trajectory arrays violate their invariants"""


class TrajectoryFormatError(TrajectoryError):
	"""Raised when a trajectory file cannot be read"""

	def __init__(self, message: str, file_path: str, **kwargs):
		self.file_path = file_path
		super().__init__(f'{file_path}: {message}', **kwargs)


class HeaderError(TrajectoryFormatError):
	"""Raised when the CSV header is missing the time column or has invalid names"""


class RaggedRowError(TrajectoryFormatError):
	"""Raised when a CSV row has a different number of fields than the header"""


class NonMonotoneTimeError(TrajectoryFormatError):
	"""Raised when the time column is not strictly increasing"""


class ConfigError(DiscoveryError):
	"""Raised when an experiment configuration is invalid"""


class UsageError(DiscoveryError):
	"""Raised when command line arguments do not fit together"""


class CellError(DiscoveryError):
	"""Raised when a single benchmark cell fails"""

	def __init__(self, message: str, system_id: str, method: str, seed: int):
		self.seed = seed
		super().__init__(f'{system_id}/{method}/seed {seed} failed: {message}', system_id=system_id, method=method)
