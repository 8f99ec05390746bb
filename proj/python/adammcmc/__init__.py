"""Python bindings for the adammcmc sampler library.

Configs are passed as dicts or JSON strings; see ``default_config()`` for keys.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    NumericalError,
    ProlateCovariance,
    truncated_gaussian_variance,
    two_moons,
)

__version__ = _core.__version__


def _to_json(config):
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def default_config():
    return _json.loads(_core.default_config())


def normalize_config(config=None):
    return _json.loads(_core.normalize_config(_to_json(config)))


def config_hash(config=None):
    return _core.config_hash(_to_json(config))


def run(config=None):
    """Run one chain and return its record, samples and summary metrics."""
    return _core.run(_to_json(config))


def scan(config, param, grid, replicates=3, jobs=1):
    return _core.scan(_to_json(config), param, list(grid), replicates, jobs)


def compare_mh(config, burn_in=0):
    return _core.compare_mh(_to_json(config), burn_in)


def verify(quick=True):
    return _core.verify(quick)


__all__ = [
    "ConfigError",
    "NumericalError",
    "ProlateCovariance",
    "compare_mh",
    "config_hash",
    "default_config",
    "normalize_config",
    "run",
    "scan",
    "truncated_gaussian_variance",
    "two_moons",
    "verify",
]
