"""Wilcoxon signed-rank test for paired samples.

The exact null distribution is built by a dynamic program over doubled ranks, which
keeps midranks integral, so the exact path stays correct in the presence of ties.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.stats import norm, rankdata

from shared.settings import settings
from ..exceptions import DimensionError


@dataclass(frozen=True, slots=True)
class WilcoxonResult:
	statistic: float
	pvalue: float
	n: int
	method: str
	degenerate: bool = False

	def __iter__(self):
		return iter((self.statistic, self.pvalue))


def _rank_sum_counts(doubled_ranks: list[int]) -> list[int]:
	# counts[s] = number of sign assignments whose positive doubled ranks sum to s
	counts = [1]
	for rank in doubled_ranks:
		extended = counts + [0] * rank
		for s, count in enumerate(counts):
			extended[s + rank] += count
		counts = extended
	return counts


def exact_pvalue(doubled_ranks: list[int], statistic_doubled: int) -> Fraction:
	"""Two-sided exact p-value, 2 * P(T <= statistic) capped at 1, as a rational."""
	counts = _rank_sum_counts(doubled_ranks)
	tail = sum(counts[: statistic_doubled + 1])
	return min(Fraction(1), Fraction(2 * tail, 2 ** len(doubled_ranks)))


def _approx_pvalue(ranks: np.ndarray, w_plus: float) -> float:
	n = ranks.size
	mean = n * (n + 1) / 4
	_, tie_counts = np.unique(ranks, return_counts=True)
	variance = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(tie_counts**3 - tie_counts)) / 48
	if variance <= 0:
		return 1.0
	difference = w_plus - mean
	z = (difference - 0.5 * np.sign(difference)) / np.sqrt(variance)
	return float(min(1.0, 2 * norm.sf(abs(z))))


def wilcoxon_signed_rank(a, b, method: Literal['auto', 'exact', 'approx'] = 'auto') -> WilcoxonResult:
	"""
	Two-sided Wilcoxon signed-rank test of paired samples.

	Zero differences are discarded and tied magnitudes get midranks. 'auto' uses the
	exact distribution up to WILCOXON_EXACT_MAX_N non-zero pairs and the normal
	approximation with tie and continuity correction beyond.

	Args:
	    a (array-like): first sample
	    b (array-like): paired second sample
	    method (str): 'auto', 'exact' or 'approx'

	Returns:
	    WilcoxonResult: unpacks to (W, p) with W = min(W+, W-); p = 1 and the
	        degenerate flag when all differences are zero
	"""
	a = np.asarray(a, dtype=float).reshape(-1)
	b = np.asarray(b, dtype=float).reshape(-1)
	if a.size != b.size:
		raise DimensionError('paired samples must have equal length', a.size, b.size)
	if method not in ('auto', 'exact', 'approx'):
		raise ValueError(f'unknown method {method!r}')

	d = a - b
	d = d[d != 0]
	n = int(d.size)
	if n == 0:
		return WilcoxonResult(0.0, 1.0, 0, method, degenerate=True)

	ranks = rankdata(np.abs(d))
	w_plus = float(np.sum(ranks[d > 0]))
	w_minus = float(np.sum(ranks[d < 0]))
	statistic = min(w_plus, w_minus)

	if method == 'auto':
		method = 'exact' if n <= settings.WILCOXON_EXACT_MAX_N else 'approx'
	if method == 'exact':
		doubled = [int(round(2 * r)) for r in ranks]
		pvalue = float(exact_pvalue(doubled, int(round(2 * statistic))))
	else:
		pvalue = _approx_pvalue(ranks, w_plus)
	return WilcoxonResult(statistic, pvalue, n, method)
