import argparse
import json
import os

import jsonschema
import pytest

from rmc.config import RunConfig, validate, validate_metadata
from rmc.exceptions import ClientException
from rmc.schema import run_config_schema


def sample_config(**overrides):
    data = {
        'command': 'sample',
        'density': 'sin(x)/sqrt(2)',
        'vars': 'x',
        'box': 'pi/4:3*pi/4',
        'n': 100,
        'seed': '1',
    }
    data.update(overrides)
    return data


def test_schema_loads():
    assert run_config_schema['title'] == 'Run configuration'
    jsonschema.validate(sample_config(), run_config_schema)


def test_round_trip_through_dict():
    config = RunConfig.from_dict(sample_config())
    assert config.n == 100
    assert config.reps == 10
    assert config.samples_path == 'samples.csv'
    assert RunConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config


def test_invalid_n():
    with pytest.raises(ClientException):
        RunConfig.from_dict(sample_config(n=0))


def test_invalid_seed():
    with pytest.raises(ClientException):
        validate(sample_config(seed='abc'))


def test_sample_needs_density():
    data = sample_config()
    del data['density']
    with pytest.raises(ClientException):
        validate(data)


def test_integrate_needs_region():
    with pytest.raises(ClientException):
        validate({'command': 'integrate', 'integrand': 'x*y', 'vars': 'x,y', 'box': '0:4,0:2', 'n': 10,
                  'seed': '0'})


def test_empty_density_is_rejected():
    config = RunConfig.from_dict(sample_config(density='   '))
    with pytest.raises(ClientException):
        config.validate()


def test_unwritable_path_is_rejected(tmp_path):
    config = RunConfig.from_dict(sample_config(metadata_path=str(tmp_path / 'missing' / 'run.json')))
    with pytest.raises(ClientException):
        config.validate()


def test_seed_value():
    assert RunConfig.from_dict(sample_config(seed='0x10')).seed_value == 16


def test_from_args_with_auto_seed():
    args = argparse.Namespace(command='sample', density='x', vars='x', box='0:1', n=5, seed='0', auto_seed=True,
                              bound_c=None, debug=False)
    config = RunConfig.from_args(args)
    assert config.seed.isdigit()
    assert config.bound_c is None
    assert config.n == 5


def test_metadata_schema():
    document = {'schema_version': 1, 'command': 'sample', 'status': 'ok', 'config': sample_config(), 'seed': 1,
                'wall_time_ms': None}
    validate_metadata(document)
    document['status'] = 'maybe'
    with pytest.raises(jsonschema.exceptions.ValidationError):
        validate_metadata(document)


def test_sample_runs_are_valid():
    runs = os.path.join(os.path.dirname(__file__), '..', '..', 'samples', 'runs')
    names = sorted(os.listdir(runs))
    assert names
    for name in names:
        with open(os.path.join(runs, name)) as fd:
            RunConfig.from_dict(json.load(fd)['config'])
