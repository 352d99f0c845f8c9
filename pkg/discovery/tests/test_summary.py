import csv

import pytest

from conftest import make_record
from shared.models import MethodEnum
from discovery.src.summary import LEGEND, render_cell, render_markdown, render_summary, write_csv


@pytest.mark.parametrize(
	'kwargs, expected',
	[
		({}, '✓*'),
		({'nonsignificant': False}, '✓'),
		({'checkmark': False}, '✗'),
		({'checkmark': False, 'nonsignificant': False, 'diverged': True}, '✗ (diverged)'),
		({'nonsignificant': False, 'diverged': True}, '✗ (diverged)'),
		({'error': 'integration failed'}, '✗ (error)'),
	],
)
def test_single_seed_cell(kwargs, expected):
	assert render_cell([make_record(**kwargs)]) == expected


def test_multi_seed_cells():
	assert render_cell([make_record(seed=0), make_record(seed=1, checkmark=False)]) == '✓* 1/2'
	assert render_cell([make_record(seed=0), make_record(seed=1, nonsignificant=False)]) == '✓ 2/2'
	diverged = make_record(seed=1, nonsignificant=False, diverged=True)
	assert render_cell([make_record(seed=0), diverged]) == '✓* 1/2'
	assert render_cell([diverged, diverged.model_copy(update={'seed': 2})]) == '✗ (diverged) 0/2'
	errors = [make_record(seed=seed, error='boom') for seed in range(3)]
	assert render_cell(errors) == '✗ (error) 0/3'
	mixed = [make_record(seed=0, error='boom'), make_record(seed=1, checkmark=False)]
	assert render_cell(mixed) == '✗ 0/2'
	assert render_cell([]) == ''


def test_markdown_grid():
	records = [
		make_record(system='sir', method=MethodEnum.gpsr, checkmark=False),
		make_record(system='sis', method=MethodEnum.stlsq),
		make_record(system='sir', method=MethodEnum.stlsq, nonsignificant=False),
		make_record(system='sis', method=MethodEnum.gpsr, error='boom'),
	]
	lines = render_markdown(records).splitlines()
	assert lines[:4] == [
		'| system | sindy.stlsq | gpsr |',
		'|---|---|---|',
		'| sis | ✓* | ✗ (error) |',
		'| sir | ✓ | ✗ |',
	]
	assert LEGEND in lines


def test_markdown_ignores_record_order():
	records = [make_record(system=system, method=method) for system in ('sir', 'sis') for method in MethodEnum]
	assert render_markdown(records) == render_markdown(records[::-1])


def test_csv_has_a_row_per_variable(tmp_path):
	path = tmp_path / 'summary.csv'
	write_csv([make_record(), make_record(system='sir', error='boom')], path)
	with open(path, newline='') as f:
		rows = list(csv.DictReader(f))
	cells = [(row['system'], row['variable']) for row in rows]
	assert cells == [('sis', 'S'), ('sis', 'I'), ('sir', 'S'), ('sir', 'I')]
	assert rows[0]['verdict'] == 'exact_form'
	assert rows[0]['significance'] == 'no significant difference'
	assert rows[2]['error'] == 'boom'
	assert rows[2]['mae'] == ''


def test_render_summary_writes_all_files(tmp_path):
	records = [make_record(seed=seed) for seed in range(2)] + [make_record(system='sir', method=MethodEnum.gpsr)]
	markdown = render_summary(records, tmp_path / 'report')
	for name in ('summary.md', 'summary.csv', 'metrics.svg', 'r2.svg'):
		assert (tmp_path / 'report' / name).exists()
	assert (tmp_path / 'report' / 'summary.md').read_text(encoding='utf-8') == markdown


def test_render_summary_is_reproducible(tmp_path):
	records = [make_record(), make_record(system='sir', checkmark=False)]
	render_summary(records, tmp_path / 'a')
	render_summary(records, tmp_path / 'b')
	for name in ('summary.md', 'summary.csv'):
		assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()


def test_render_summary_needs_records(tmp_path):
	with pytest.raises(ValueError):
		render_summary([], tmp_path)
