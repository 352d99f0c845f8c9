import json

import pytest
import yaml

import run
from conftest import make_record
from discovery.src.exprcore import parse, structural_match
from shared.models import MatchVerdict, MethodEnum


@pytest.fixture
def sir_csv(tmp_path):
	path = tmp_path / 'sir.csv'
	run.simulate('sir', str(path))
	return path


def test_simulate_writes_trajectory(tmp_path):
	path = tmp_path / 'lorenz.csv'
	run.simulate('lorenz', str(path))
	lines = path.read_text().splitlines()
	assert lines[0] == 't,x,y,z'
	assert len(lines) == 2502
	assert (tmp_path / 'lorenz.deriv.csv').exists()


def test_simulate_unknown_system(tmp_path, capsys):
	with pytest.raises(SystemExit) as info:
		run.simulate('nope', str(tmp_path / 'nope.csv'))
	assert info.value.code == 1
	err = capsys.readouterr().err
	assert 'nope' in err
	assert 'lorenz' in err


def test_noisy_simulation_is_reproducible(tmp_path):
	a, b = tmp_path / 'a.csv', tmp_path / 'b.csv'
	run.simulate('pendulum', str(a), noise=0.01, seed=3)
	run.simulate('pendulum', str(b), noise=0.01, seed=3)
	assert a.read_bytes() == b.read_bytes()
	run.simulate('pendulum', str(b), noise=0.01, seed=4)
	assert a.read_bytes() != b.read_bytes()


def test_discover_unknown_method(sir_csv, capsys):
	with pytest.raises(SystemExit) as info:
		run.discover('sindy.lasso', str(sir_csv))
	assert info.value.code == 2
	assert 'sindy.stlsq' in capsys.readouterr().err


def test_discover_omp_needs_config(sir_csv, capsys):
	with pytest.raises(SystemExit) as info:
		run.discover('sindy.omp', str(sir_csv))
	assert info.value.code == 2
	assert 'n_nonzero' in capsys.readouterr().err


def test_discover_missing_config(sir_csv, tmp_path):
	with pytest.raises(SystemExit) as info:
		run.discover('sindy.stlsq', str(sir_csv), config=str(tmp_path / 'missing.yaml'))
	assert info.value.code == 2


def test_discover_missing_data(tmp_path):
	with pytest.raises(SystemExit) as info:
		run.discover('sindy.stlsq', str(tmp_path / 'missing.csv'))
	assert info.value.code == 1


def test_discover_sindy_on_sir(sir_csv, capsys):
	run.discover('sindy.stlsq', str(sir_csv))
	out = capsys.readouterr().out
	assert 'dS/dt = -0.3*S*I' in out
	assert 'dR/dt = 0.1*I' in out

	report = json.loads((sir_csv.parent / 'sir.sindy.stlsq.json').read_text())
	assert report['method'] == 'sindy.stlsq'
	assert len(report['expressions']) == 3


def _printed_rhs(printed: str, name: str) -> str:
	return next(line for line in printed.splitlines() if line.startswith(f'd{name}/dt = ')).split(' = ', 1)[1]


def test_discover_with_config_file(sir_csv, tmp_path, capsys):
	"""The combined sindy method reads its optimizer and threshold from the config"""
	config = tmp_path / 'sindy.yaml'
	config.write_text(yaml.safe_dump({'optimizer': 'stlsq', 'threshold': 0.05, 'library': {'custom': ['x', 'x*y']}}))
	out = tmp_path / 'sindy.json'
	run.discover('sindy', str(sir_csv), out=str(out), config=str(config))
	found = parse(_printed_rhs(capsys.readouterr().out, 'I'), ['S', 'I', 'R'])
	truth = parse('0.3*S*I - 0.1*I', ['S', 'I', 'R'])
	assert structural_match(found, truth, coeff_rtol=0.01) == MatchVerdict.exact_form
	assert out.exists()


def test_discover_omp_keeps_no_negligible_terms(sir_csv, tmp_path, capsys):
	"""With two terms allowed, dS/dt stays the single product the data supports"""
	config = tmp_path / 'omp.yaml'
	config.write_text(yaml.safe_dump({'n_nonzero': 2, 'library': {'custom': ['x', 'x*y']}}))
	run.discover('sindy.omp', str(sir_csv), out=str(tmp_path / 'omp.json'), config=str(config))
	assert _printed_rhs(capsys.readouterr().out, 'S') == '-0.3*S*I'


def test_discover_gpsr_prints_fronts(sir_csv, tmp_path, capsys):
	config = tmp_path / 'gp.yaml'
	config.write_text(
		yaml.safe_dump(
			{'population_size': 50, 'generations': 2, 'tournament_size': 5, 'function_set': ['+', '-', '*']}
		)
	)
	out = tmp_path / 'gp.json'
	run.discover('gpsr', str(sir_csv), out=str(out), config=str(config))
	printed = capsys.readouterr().out
	for name in ('S', 'I', 'R'):
		assert f'Pareto front d{name}/dt' in printed
		assert f'd{name}/dt = ' in printed
	assert 'complexity' in printed
	assert out.exists()


def test_report_is_reproducible(tmp_path, capsys):
	records_dir = tmp_path / 'run' / 'records'
	records_dir.mkdir(parents=True)
	for record in [make_record(), make_record(method=MethodEnum.gpsr, checkmark=False)]:
		(records_dir / record.file_name).write_text(record.model_dump_json(indent=2), encoding='utf-8')

	run.report(str(records_dir))
	assert '| system | sindy.stlsq | gpsr |' in capsys.readouterr().out
	summary = tmp_path / 'run' / 'summary.md'
	first = summary.read_bytes()
	run.report(str(records_dir))
	assert summary.read_bytes() == first


def test_report_without_records(tmp_path):
	with pytest.raises(SystemExit) as info:
		run.report(str(tmp_path))
	assert info.value.code == 2
