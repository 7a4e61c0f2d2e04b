# -*- coding: utf-8 -*-
"""
Deterministic run outputs: identical inputs produce byte-identical files.
"""
import io
import json
import logging

import numpy as np

logger = logging.getLogger(__name__)


def format_float(value):
    """Shortest repr that round-trips."""
    return repr(float(value))


def write_csv(path, names, points):
    """Header of variable names, one row per point, LF line endings."""
    points = np.asarray(points, dtype=np.float64)
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fd:
        fd.write(','.join(names) + '\n')
        for row in points.tolist():
            fd.write(','.join(format_float(v) for v in row) + '\n')
    logger.debug('Wrote %d rows to %s', points.shape[0], path)


def read_csv(path):
    with io.open(path, 'r', encoding='utf-8') as fd:
        names = fd.readline().strip().split(',')
        rows = [[float(v) for v in line.split(',')] for line in fd if line.strip()]
    return names, np.array(rows, dtype=np.float64).reshape(-1, len(names))


def marshal(document, fd):
    """ Marshal a document to fd. """
    json.dump(document, fd, sort_keys=True, indent=2, allow_nan=False)
    fd.write('\n')
    fd.flush()


def write_json(path, document):
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fd:
        marshal(document, fd)
    logger.debug('Wrote metadata to %s', path)


def read_json(path):
    with io.open(path, 'r', encoding='utf-8') as fd:
        return json.load(fd)
