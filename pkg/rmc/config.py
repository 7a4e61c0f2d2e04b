# -*- coding: utf-8 -*-
import dataclasses
import logging
import os
from dataclasses import dataclass
from typing import List, Optional

import jsonschema

from .exceptions import ClientException
from .randomness import parse_seed
from .schema import run_config_schema, run_metadata_schema
from .util import auto_seed

logger = logging.getLogger(__name__)

REQUIRED_TEXT = {
    'sample': ('density', 'vars', 'box'),
    'validate': ('density', 'vars', 'box'),
    'bound': ('density', 'vars', 'box'),
    'demo': ('density', 'vars', 'box'),
    'integrate': ('integrand', 'region', 'vars', 'box'),
}


@dataclass
class RunConfig(object):
    """
    Everything a run needs. Its dictionary form is echoed into the run metadata and is
    enough to execute the run again.
    """
    command: str
    vars: str
    box: str
    density: Optional[str] = None
    integrand: Optional[str] = None
    region: Optional[str] = None
    cdf: Optional[str] = None
    reference: Optional[str] = None
    n: int = 1000
    reps: int = 10
    seed: str = '0'
    bound_c: Optional[float] = None
    bins: int = 8
    proposal_bins: Optional[int] = None
    grid: Optional[int] = None
    safety: Optional[float] = None
    alpha: float = 0.01
    method: str = 'screened'
    sizes: Optional[List[int]] = None
    exact: Optional[float] = None
    check_truncation: bool = False
    samples_path: Optional[str] = 'samples.csv'
    metadata_path: Optional[str] = 'run.json'
    plot_path: Optional[str] = None
    record_timing: bool = False

    @classmethod
    def from_args(cls, args):
        """Builds a config from an argparse namespace; unknown attributes are ignored."""
        names = {f.name for f in dataclasses.fields(cls)}
        values = {k: v for k, v in vars(args).items() if k in names and v is not None}
        if getattr(args, 'auto_seed', False):
            values['seed'] = str(auto_seed())
            logger.info('Using auto seed %s', values['seed'])
        return cls(**values)

    @classmethod
    def from_dict(cls, data):
        validate(data)
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def seed_value(self):
        return parse_seed(self.seed)

    def validate(self):
        validate(self.to_dict())
        self.validate_required()
        self.validate_paths()

    def validate_required(self):
        """
        Rejects empty strings in inputs the command requires, which the schema alone lets through.
        """
        for key in REQUIRED_TEXT[self.command]:
            value = getattr(self, key)
            if value is None or not value.strip():
                raise ClientException('--{} is required for "{}" and must not be empty'.format(
                    key.replace('_', '-'), self.command))

    def validate_paths(self):
        for key in ('samples_path', 'metadata_path', 'plot_path'):
            path = getattr(self, key)
            if not path:
                continue
            directory = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
                raise ClientException('cannot write {} to "{}"'.format(key.replace('_', ' '), path))


def validate(config):
    try:
        jsonschema.validate(config, run_config_schema)
    except jsonschema.exceptions.ValidationError as e:
        raise ClientException('run configuration was invalid: {}'.format(e.message))


def validate_metadata(document):
    jsonschema.validate(document, run_metadata_schema)
