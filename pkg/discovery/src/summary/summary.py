import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from shared.logger import logger
from shared.models import BenchmarkRecord, MethodEnum
from ..dynsys import BUILTIN_SYSTEMS
from ..stats import capped_inv_log_mae, capped_r2

# fixed ids inside the SVG so reruns produce identical files
plt.rcParams['svg.hashsalt'] = 'discovery'

LEGEND = (
	'✓ structural form recovered for every variable, '
	'✓* additionally no significant trajectory difference (Wilcoxon, all p > 0.05)'
)


def _system_order(records: list[BenchmarkRecord]) -> list[str]:
	present = {record.system for record in records}
	ordered = [system for system in BUILTIN_SYSTEMS if system in present]
	for record in records:
		if record.system not in ordered:
			ordered.append(record.system)
	return ordered


def _method_order(records: list[BenchmarkRecord]) -> list[MethodEnum]:
	present = {record.method for record in records}
	return [method for method in MethodEnum if method in present]


def _group(records: list[BenchmarkRecord]) -> dict[tuple[str, MethodEnum], list[BenchmarkRecord]]:
	groups = defaultdict(list)
	for record in sorted(records, key=lambda r: r.seed):
		groups[(record.system, record.method)].append(record)
	return groups


def _single_cell(record: BenchmarkRecord) -> str:
	if record.error:
		return '✗ (error)'
	if record.diverged:
		return '✗ (diverged)'
	if record.checkmark:
		return '✓*' if record.metrics is not None and record.metrics.nonsignificant else '✓'
	return '✗'


def render_cell(records: list[BenchmarkRecord]) -> str:
	"""
	Text of one grid cell.

	A single seed renders as its verdict; several seeds add the success rate, e.g. '✓ 7/10',
	starred when every successful seed also passed the Wilcoxon check.
	"""
	if not records:
		return ''
	if len(records) == 1:
		return _single_cell(records[0])
	successes = [record for record in records if record.succeeded]
	rate = f'{len(successes)}/{len(records)}'
	if successes:
		starred = all(record.metrics is not None and record.metrics.nonsignificant for record in successes)
		return f'{"✓*" if starred else "✓"} {rate}'
	if all(record.error for record in records):
		return f'✗ (error) {rate}'
	if all(record.diverged for record in records):
		return f'✗ (diverged) {rate}'
	return f'✗ {rate}'


def render_markdown(records: list[BenchmarkRecord]) -> str:
	"""Systems by methods grid of checkmarks, a pure function of the records."""
	systems, methods = _system_order(records), _method_order(records)
	groups = _group(records)
	lines = [
		'| system | ' + ' | '.join(method.value for method in methods) + ' |',
		'|---|' + '---|' * len(methods),
	]
	for system in systems:
		cells = [render_cell(groups.get((system, method), [])) for method in methods]
		lines.append(f'| {system} | ' + ' | '.join(cells) + ' |')
	lines.extend(['', LEGEND, ''])
	return '\n'.join(lines)


def _csv_value(value) -> str:
	if value is None:
		return ''
	if isinstance(value, float):
		return repr(value)
	return str(value)


def write_csv(records: list[BenchmarkRecord], path: Path):
	"""Every metric value, one row per record and state variable."""
	header = [
		'system',
		'method',
		'seed',
		'variable',
		'expression',
		'verdict',
		'checkmark',
		'mae',
		'r2',
		'wilcoxon_p',
		'inv_log_mae',
		'significance',
		'diverged',
		'error',
	]
	systems = _system_order(records)
	methods = list(MethodEnum)
	ordered = sorted(records, key=lambda r: (systems.index(r.system), methods.index(r.method), r.seed))
	with open(path, 'w', newline='') as f:
		writer = csv.writer(f)
		writer.writerow(header)
		for record in ordered:
			metrics = record.metrics
			for j, variable in enumerate(record.variables or ['']):
				row = [
					record.system,
					record.method.value,
					record.seed,
					variable,
					record.expressions[j] if j < len(record.expressions) else None,
					record.verdicts[j].value if j < len(record.verdicts) else None,
					record.checkmark,
					metrics.mae[j] if metrics else None,
					metrics.r2[j] if metrics else None,
					metrics.wilcoxon_p[j] if metrics else None,
					metrics.inv_log_mae if metrics else None,
					metrics.verdict.value if metrics else None,
					record.diverged,
					record.error,
				]
				writer.writerow([_csv_value(value) for value in row])


def _bar_chart(
	values: dict[tuple[str, MethodEnum], float],
	systems: list[str],
	methods: list[MethodEnum],
	ylabel: str,
	path: Path,
):
	fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(systems) * max(1, len(methods)) / 2 + 2), 4))
	width = 0.8 / max(1, len(methods))
	x = np.arange(len(systems))
	for i, method in enumerate(methods):
		heights = [values.get((system, method), np.nan) for system in systems]
		ax.bar(x - 0.4 + width * (i + 0.5), heights, width, label=method.value)
	# cross-method mean per system
	for k, system in enumerate(systems):
		present = [values[(system, m)] for m in methods if (system, m) in values]
		if present:
			ax.hlines(np.mean(present), k - 0.45, k + 0.45, colors='black', linewidth=1.5)
	ax.set_xticks(x)
	ax.set_xticklabels(systems, rotation=30, ha='right')
	ax.set_ylabel(ylabel)
	ax.legend(fontsize='small')
	fig.tight_layout()
	fig.savefig(path, format='svg', metadata={'Date': None})
	plt.close(fig)


def render_charts(records: list[BenchmarkRecord], out_dir: Path) -> tuple[Path, Path]:
	"""Bar charts of |1/log(MAE)| and mean R2 per system and method, averaged over seeds."""
	systems, methods = _system_order(records), _method_order(records)
	inv_log, r2_mean = {}, {}
	for key, group in _group(records).items():
		scored = [record.metrics for record in group if record.metrics is not None]
		if not scored:
			continue
		inv_log[key] = float(np.mean([capped_inv_log_mae(m.inv_log_mae) for m in scored]))
		r2_mean[key] = float(np.mean([np.mean([capped_r2(v) for v in m.r2]) for m in scored]))

	metrics_path, r2_path = Path(out_dir) / 'metrics.svg', Path(out_dir) / 'r2.svg'
	_bar_chart(inv_log, systems, methods, '|1/log(MAE)|', metrics_path)
	_bar_chart(r2_mean, systems, methods, 'R² (floored)', r2_path)
	return metrics_path, r2_path


def render_summary(records: list[BenchmarkRecord], out_dir: Path) -> str:
	"""
	Write summary.md, summary.csv, metrics.svg and r2.svg for a set of records.

	Args:
	    records (list[BenchmarkRecord]): at least one record
	    out_dir (Path): target directory

	Returns:
	    str: the markdown grid
	"""
	if not records:
		raise ValueError('render_summary needs at least one record')
	out_dir = Path(out_dir)
	out_dir.mkdir(parents=True, exist_ok=True)

	markdown = render_markdown(records)
	(out_dir / 'summary.md').write_text(markdown, encoding='utf-8')
	write_csv(records, out_dir / 'summary.csv')
	render_charts(records, out_dir)
	logger.info(f'Wrote summary of {len(records)} records to {out_dir}')
	return markdown
