# -*- coding: utf-8 -*-
import logging
import os
import secrets

from .randomness import MASK64

logger = logging.getLogger(__name__)

THREADS_ENV = 'RMC_THREADS'


def worker_count():
    """
    Worker threads for samplers and replications.

    RMC_THREADS caps the count; unset or invalid values fall back to the machine's parallelism.
    """
    default = os.cpu_count() or 1
    value = os.environ.get(THREADS_ENV)
    if not value:
        return default
    try:
        count = int(value)
    except ValueError:
        logger.warning('Ignoring %s=%r: not an integer', THREADS_ENV, value)
        return default
    if count < 1:
        logger.warning('Ignoring %s=%r: must be >= 1', THREADS_ENV, value)
        return default
    return count


def auto_seed():
    """64 bits from the OS; callers record the value so the run can be repeated."""
    return secrets.randbits(64) & MASK64
