import math
from dataclasses import dataclass
from typing import Sequence

from ..exprcore import Expression, complexity, format_expression


@dataclass(frozen=True, slots=True)
class FrontEntry:
	complexity: int
	loss: float
	expr: Expression


class ParetoFront:
	"""Lowest-loss expression per complexity; losses strictly decrease as complexity grows."""

	def __init__(self):
		self._entries: dict[int, FrontEntry] = {}

	def __len__(self) -> int:
		return len(self._entries)

	def __iter__(self):
		return iter(self.entries)

	@property
	def entries(self) -> list[FrontEntry]:
		return [self._entries[size] for size in sorted(self._entries)]

	def insert(self, expr: Expression, loss: float, size: int | None = None) -> bool:
		"""
		Offer a candidate to the front.

		Args:
		    expr (Expression): candidate expression
		    loss (float): its raw loss
		    size (int | None): its complexity, computed when None

		Returns:
		    bool: True when the candidate entered the front
		"""
		if not math.isfinite(loss):
			return False
		size = complexity(expr) if size is None else size
		for entry in self._entries.values():
			if entry.complexity <= size and entry.loss <= loss:
				return False
		self._entries = {
			other: entry for other, entry in self._entries.items() if not (other > size and entry.loss >= loss)
		}
		self._entries[size] = FrontEntry(size, loss, expr)
		return True

	def best_accuracy(self) -> FrontEntry | None:
		if not self._entries:
			return None
		return min(self.entries, key=lambda entry: (entry.loss, entry.complexity))

	def best_tradeoff(self, parsimony_coefficient: float) -> FrontEntry | None:
		"""Entry minimizing loss plus parsimony_coefficient per node."""
		if not self._entries:
			return None

		def score(entry: FrontEntry) -> tuple[float, int]:
			return entry.loss + parsimony_coefficient * entry.complexity, entry.complexity

		return min(self.entries, key=score)

	def select(self, model_selection: str, parsimony_coefficient: float) -> FrontEntry | None:
		if model_selection == 'accuracy':
			return self.best_accuracy()
		return self.best_tradeoff(parsimony_coefficient)

	def to_table(self, names: Sequence[str] | None = None, precision: int = 6) -> str:
		"""Front as a plain text table, one row per complexity level."""
		rows = [('complexity', 'loss', 'expression')]
		for entry in self.entries:
			rows.append(
				(str(entry.complexity), f'{entry.loss:.{precision}g}', format_expression(entry.expr, names, precision))
			)
		widths = [max(len(row[i]) for row in rows) for i in range(2)]
		return '\n'.join(f'{row[0]:>{widths[0]}}  {row[1]:>{widths[1]}}  {row[2]}' for row in rows)
