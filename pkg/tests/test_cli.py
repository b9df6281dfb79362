import json
from pathlib import Path

from click.testing import CliRunner
import pytest

from plaplib.cli import cli
from plaplib.testing import check_equals_file, assert_files_equal


def invoke(*args: str, **kwargs):
    runner = CliRunner()
    return runner.invoke(cli, list(args), catch_exceptions=False, **kwargs)


def test_cli_help():
    result = invoke('--help')
    assert result.exit_code == 0
    assert result.output.startswith("Usage: cli [OPTIONS] COMMAND [ARGS]...")
    for command in ('constant', 'verify', 'minimize', 'sweep', 'sharpness', 'shoot', 'fig4', 'eigen', 'schema'):
        assert command in result.output


@check_equals_file('constant_p2_l0.csv')
def test_constant_csv(buf):
    result = invoke('constant', '--p', '2', '--lambda', '0', '--format', 'csv')
    assert result.exit_code == 0
    buf.write(result.stdout)


def test_constant_json():
    result = invoke('constant', '--p', '2', '--lambda', '0.25', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['command'] == 'constant'
    assert record['inputs'] == {'p': 2., 'lambda': 0.25}
    assert record['scalars']['branch'] == 'positive'
    assert record['scalars']['K'] == pytest.approx(0.5)
    assert record['scalars']['C'] == pytest.approx(1., abs=1e-12)
    assert record['series'] == {}
    assert 'wall_time' not in record

    # output depends only on the inputs
    assert invoke('constant', '--p', '2', '--lambda', '0.25', '-f', 'json').stdout == result.stdout


def test_constant_timing():
    result = invoke('constant', '--p', '3', '--lambda', '-1', '-f', 'json', '--timing')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['scalars']['branch'] == 'negative'
    assert record['wall_time'] >= 0.


def test_constant_text():
    result = invoke('constant', '--p', '2')
    assert result.exit_code == 0
    assert result.stdout.startswith("constant:\n")
    assert "  C: 1.27323954\n" in result.stdout


@pytest.mark.parametrize('args', [
    ('constant', '--p', '2', '--lambda', '2'),
    ('constant', '--p', '2', '--lambda', '1'),
    ('constant', '--p', '1'),
    ('minimize', '--mesh-n', '8'),
    ('minimize', '--mesh-n', '64', '--y', '2.5'),
    ('fig4', '--k', '1.5'),
    ('sharpness', '0.1', '--mesh-n', '16'),
])
def test_domain_errors(args):
    result = invoke(*args)
    assert result.exit_code == 2


def test_verify_reduction():
    result = invoke('verify', 'reduction', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['scalars']['passed'] is True
    assert record['scalars']['failed'] == 0
    assert set(record['series']) == {'check', 'p', 'max_residual', 'tolerance', 'passed'}
    assert all(record['series']['passed'])


def test_verify_lyapunov_csv():
    result = invoke('verify', 'lyapunov', '--p', '2', '--p', '3', '-f', 'csv')
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == 'check,p,max_residual,tolerance,passed'
    assert all(line.endswith(',true') for line in lines[1:])


def test_fig4_overshoot():
    result = invoke('fig4', '--p', '2', '--k', '0.75', '--points', '101', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    scalars = record['scalars']
    assert record['inputs']['lambda'] == pytest.approx(0.5625)
    assert scalars['overshoot_x'] == pytest.approx(3.14159265358979 / 3.)
    assert scalars['exceeds_one'] is True
    assert scalars['max'] > 1.
    assert scalars['argmax'] == pytest.approx(scalars['overshoot_x'])
    assert max(record['series']['u_y']) == pytest.approx(scalars['max'])
    assert len(record['series']['x']) == 103


def test_fig4_no_overshoot():
    result = invoke('fig4', '--p', '2', '--k', '0.25', '--points', '11', '-f', 'json')
    assert result.exit_code == 0
    scalars = json.loads(result.stdout)['scalars']
    assert scalars['overshoot_x'] is None
    assert scalars['exceeds_one'] is False
    assert scalars['max'] == 1.


def test_minimize():
    result = invoke('minimize', '--p', '2', '--lambda', '-1', '--mesh-n', '128', '--profile', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['converged'] == {'minimize': True}
    assert record['scalars']['rel_error'] < 1e-2
    assert record['scalars']['in_max_class'] is True
    assert set(record['series']) == {'x', 'u', 'u_y'}
    assert len(record['series']['x']) == 129


def test_sweep():
    result = invoke('sweep', '--p', '2', '--lambda', '-1', '--mesh-n', '64', '--y-count', '4',
                    '--jobs', '2', '--allow-nonconverged', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert len(record['series']['y']) == 4
    assert record['scalars']['rel_error'] < 2e-2
    assert record['scalars']['argmin_at_center'] is True


def test_sharpness():
    result = invoke('sharpness', '0.2', '0.4', '--p', '2', '--mesh-n', '256', '--jobs', '2',
                    '--allow-nonconverged', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['series']['delta'] == [0.2, 0.4]
    scalars = record['scalars']
    assert scalars['C'] == pytest.approx(4. / 3.14159265358979)
    assert scalars['all_above_constant'] is True
    assert scalars['decreasing'] is True
    assert scalars['gap_ratio'] > 1.
    assert set(record['converged']) == {'delta=0.2', 'delta=0.4'}


def test_eigen():
    result = invoke('eigen', '--p', '2', '--mesh-n', '128', '--allow-nonconverged', '-f', 'json')
    assert result.exit_code == 0
    scalars = json.loads(result.stdout)['scalars']
    assert scalars['lambda1'] == 1.
    assert scalars['rel_error'] < 1e-2


def test_shoot_below_constant():
    result = invoke('shoot', '--p', '2', '--lambda', '0', '--steps', '2000', '-f', 'json')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['scalars']['passed'] is True
    assert record['series']['solves'] == [False]
    assert record['series']['r_plus_l1'][0] == pytest.approx(0.9 * record['scalars']['C'])


def test_config_file(tmp_path: Path):
    config = tmp_path / 'run.cfg'
    config.write_text("# shared parameters\np = 3\nlambda = -1\nformat = json\nmesh-n = 64\n")
    result = invoke('--config', str(config), 'constant')
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record['inputs'] == {'p': 3., 'lambda': -1.}

    # command line overrides the file
    result = invoke('--config', str(config), 'constant', '--p', '2')
    assert json.loads(result.stdout)['inputs']['p'] == 2.


def test_output_dir(tmp_path: Path):
    result = invoke('constant', '--p', '2', '--lambda', '0', '-f', 'csv', '-o', 'c.csv',
                    env={'PLAPLIB_OUTPUT_DIR': str(tmp_path)})
    assert result.exit_code == 0
    assert "p,lambda" not in result.stdout
    assert_files_equal('constant_p2_l0.csv', tmp_path / 'c.csv')

    # absolute paths ignore the output directory
    out = tmp_path / 'sub' / 'abs.csv'
    result = invoke('constant', '--p', '2', '--lambda', '0', '-f', 'csv', '-o', str(out),
                    env={'PLAPLIB_OUTPUT_DIR': str(tmp_path / 'unused')})
    assert result.exit_code == 0
    assert_files_equal('constant_p2_l0.csv', out)
    assert not (tmp_path / 'unused').exists()


def test_schema():
    result = invoke('schema')
    assert result.exit_code == 0
    schema = json.loads(result.stdout)
    assert set(schema['required']) >= {'command', 'inputs', 'scalars', 'series', 'converged'}
