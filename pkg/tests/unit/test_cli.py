import json
import math

import pytest

from rmc.cli import CLI, EXIT_BUDGET, EXIT_PARSE, EXIT_USAGE, EXIT_VALIDATION, attach_values, exit_code
from rmc.exceptions import BudgetExhausted, ExpressionSyntaxError
from rmc.writers import read_csv

SINE = ['--density', 'sin(x)/sqrt(2)', '--vars', 'x', '--box', 'pi/4:3*pi/4', '--bound-c', '1.1']


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*args):
    return CLI(list(args)).run()


def test_sample_writes_csv_and_metadata(workdir):
    assert run('sample', *SINE, '--n', '500', '--seed', '1') == 0
    names, points = read_csv('samples.csv')
    assert names == ['x']
    assert points.shape == (500, 1)
    document = json.loads((workdir / 'run.json').read_text())
    assert document['schema_version'] == 1
    assert document['status'] == 'ok'
    assert document['seed'] == 1
    assert document['accepted'] == 500
    assert document['bound_c'] == 1.1
    assert document['wall_time_ms'] is None
    assert document['config']['density'] == 'sin(x)/sqrt(2)'


def test_sample_outputs_are_byte_identical(workdir):
    args = ['sample', '--density', 'exp(-(x^2 + y^2 - 0.4*x*y)/1.92)', '--vars', 'x,y', '--box', '-5:5,-5:5',
            '--n', '2000', '--seed', '0x2A', '--plot']
    assert run(*args) == 0
    first = [(workdir / name).read_bytes() for name in ('samples.csv', 'run.json', 'samples.svg')]
    assert run(*args) == 0
    second = [(workdir / name).read_bytes() for name in ('samples.csv', 'run.json', 'samples.svg')]
    assert first == second
    assert b'\r\n' not in first[0]
    assert 'summary' in json.loads(first[1].decode('utf-8'))


def test_record_timing(workdir):
    assert run('sample', *SINE, '--n', '50', '--record-timing') == 0
    assert json.loads((workdir / 'run.json').read_text())['wall_time_ms'] >= 0


def test_parse_error_exit_code(workdir):
    assert run('sample', '--density', 'sin(x', '--vars', 'x', '--box', '0:1') == EXIT_PARSE


def test_unknown_identifier_exit_code(workdir):
    assert run('sample', '--density', 'x*z', '--vars', 'x', '--box', '0:1') == EXIT_PARSE


def test_usage_errors(workdir):
    assert run('sample', '--density', 'x') == EXIT_USAGE
    assert run() == EXIT_USAGE
    assert run('sample', '--density', 'x', '--vars', 'x', '--box', '1:0') == EXIT_USAGE
    assert run('sample', '--density', 'x', '--vars', 'x,y', '--box', '0:1') == EXIT_USAGE
    assert run('sample', '--density', 'x', '--vars', 'x', '--box', '0:1', '--seed', 'abc') == EXIT_USAGE


def test_envelope_violation_is_a_usage_error(workdir):
    assert run('sample', '--density', 'sin(x)/sqrt(2)', '--vars', 'x', '--box', 'pi/4:3*pi/4',
               '--bound-c', '0.5') == EXIT_USAGE
    document = json.loads((workdir / 'run.json').read_text())
    assert document['status'] == 'error'
    assert 'envelope' in document['error']


def test_exit_code_mapping():
    assert exit_code(ExpressionSyntaxError('bad', 'x', 0)) == EXIT_PARSE
    assert exit_code(BudgetExhausted(20000, 0, 10000)) == EXIT_BUDGET


def test_version(capsys):
    assert run('--version') == 0
    assert capsys.readouterr().out.strip() == '1.0.0'


def test_validate_needs_cdf_in_one_dimension(workdir):
    assert run('validate', *SINE, '--n', '100') == EXIT_USAGE


def test_validate_fails_with_wrong_cdf(workdir):
    assert run('validate', *SINE, '--n', '1000', '--cdf', 'x') == EXIT_VALIDATION
    document = json.loads((workdir / 'run.json').read_text())
    assert document['status'] == 'error'
    assert document['gof']['kind'] == 'ks'
    assert document['gof']['pass'] is False


def test_validate_chi_square_in_two_dimensions(workdir):
    assert run('validate', '--density', '1 + 0*x', '--vars', 'x,y', '--box', '0:1,0:1', '--n', '2000',
               '--bins', '4', '--seed', '3') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert document['gof']['kind'] == 'chi-square'
    assert document['gof']['dof'] == 15
    assert not (workdir / 'samples.csv').exists()


def test_validate_detects_wrong_reference(workdir):
    assert run('validate', '--density', '1 + 0*x', '--vars', 'x,y', '--box', '0:1,0:1', '--n', '5000',
               '--reference', 'x*y', '--bins', '4') == EXIT_VALIDATION


def test_integrate_direct_constant(workdir):
    assert run('integrate', '--integrand', '3', '--region', 'x >= 0', '--vars', 'x,y', '--box', '0:4,0:2',
               '--n', '100', '--reps', '2', '--method', 'direct') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert document['estimate']['value'] == 24.0
    assert document['per_replication_values'] == [24.0, 24.0]


def test_integrate_both_methods(workdir):
    assert run('integrate', '--integrand', 'x*y', '--region', 'y^2 <= x and x <= y + 2', '--vars', 'x,y',
               '--box', '0:4,0:2', '--n', '2000', '--reps', '3', '--method', 'both', '--seed', '7') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert document['estimate']['method'] == 'screened'
    assert document['direct']['method'] == 'direct'
    assert abs(document['estimate']['value'] - 6.0) < 1.0


def test_integrate_convergence_table(workdir, capsys):
    assert run('integrate', '--integrand', 'x*y', '--region', 'y^2 <= x and x <= y + 2', '--vars', 'x,y',
               '--box', '0:4,0:2', '--reps', '2', '--sizes', '100,1000', '--exact', '6') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert [row['n'] for row in document['study']] == [100, 1000]
    assert all(row['wall_time_ms'] is None for row in document['study'])
    assert 'deviation' in capsys.readouterr().out


def test_integrate_rejects_non_indicator_region(workdir):
    assert run('integrate', '--integrand', 'x*y', '--region', 'x + y', '--vars', 'x,y', '--box', '0:4,0:2',
               '--n', '10') == EXIT_USAGE


def test_bound(workdir, capsys):
    assert run('bound', '--density', 'sin(x)/sqrt(2)', '--vars', 'x', '--box', 'pi/4:3*pi/4', '--safety', '1') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert abs(document['bound_c'] - 0.7071067) < 1e-6
    assert document['maximum']['grid_per_dim'] == 1025
    assert 'c = ' in capsys.readouterr().out


def test_demo_writes_svg(workdir):
    assert run('demo', *SINE, '--n', '300', '--plot', 'principle.svg') == 0
    svg = (workdir / 'principle.svg').read_text()
    assert svg.startswith('<svg')
    assert svg.count('<circle') == 300
    assert '<polyline' in svg


def test_rerun_reproduces_run(workdir):
    assert run('sample', *SINE, '--n', '300', '--seed', '5') == 0
    first = (workdir / 'samples.csv').read_bytes()
    original = json.loads((workdir / 'run.json').read_text())
    (workdir / 'samples.csv').unlink()
    assert run('rerun', 'run.json', '--metadata', 'again.json') == 0
    assert (workdir / 'samples.csv').read_bytes() == first
    again = json.loads((workdir / 'again.json').read_text())
    assert again['proposals_drawn'] == original['proposals_drawn']
    assert again['config']['metadata_path'] == 'again.json'


def test_attach_values():
    assert attach_values(['sample', '--box', '-5:5,-5:5', '--n', '10']) == ['sample', '--box=-5:5,-5:5', '--n', '10']
    assert attach_values(['--density', '-x^2+1', '--bound-c', '-1']) == ['--density=-x^2+1', '--bound-c', '-1']
    assert attach_values(['--box', '--n', '3']) == ['--box', '--n', '3']


def test_negative_lower_bound_box(workdir):
    assert run('sample', '--density', '1 - x^2', '--vars', 'x', '--box', '-1:1', '--n', '200', '--seed', '3') == 0
    _, points = read_csv('samples.csv')
    assert points.shape == (200, 1)
    assert points.min() >= -1.0


def test_estimated_bound_is_the_grid_maximum(workdir):
    assert run('sample', '--density', 'sin(x)/sqrt(2)', '--vars', 'x', '--box', 'pi/4:3*pi/4', '--n', '100') == 0
    document = json.loads((workdir / 'run.json').read_text())
    assert abs(document['bound_c'] - 1 / math.sqrt(2)) < 1e-9
    assert document['config']['safety'] is None


@pytest.mark.slow
def test_gaussian_example_from_the_command_line(workdir):
    assert run('sample', '--density', 'exp(-(x^2+y^2-0.4*x*y)/1.92)/6.1563', '--vars', 'x,y', '--box', '-5:5,-5:5',
               '--n', '100000', '--seed', '42') == 0
    _, points = read_csv('samples.csv')
    assert points.shape == (100000, 2)
    document = json.loads((workdir / 'run.json').read_text())
    assert abs(document['acceptance_rate'] - 0.0616) <= 0.003
    assert abs(document['bound_c'] - 1 / 6.1563) < 1e-9


@pytest.mark.slow
def test_outputs_do_not_depend_on_thread_count(workdir, monkeypatch):
    args = ['sample', '--density', 'exp(-(x^2+y^2-0.4*x*y)/1.92)/6.1563', '--vars', 'x,y', '--box', '-5:5,-5:5',
            '--n', '20000', '--seed', '42', '--plot']
    outputs = []
    for threads in ('1', '8'):
        monkeypatch.setenv('RMC_THREADS', threads)
        assert run(*args) == 0
        outputs.append([(workdir / name).read_bytes() for name in ('samples.csv', 'run.json', 'samples.svg')])
    assert outputs[0] == outputs[1]
