"""Goal distance gradient: learned step-count distances, bridge planning and baselines."""

import json

from . import _core
from ._core import (
    ConfigError,
    ContractError,
    Environment,
    NumericalError,
    Session,
    derive_seed,
    env_names,
    git_blob_sha1,
    her_relabel,
    make_env,
    preset_names,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "Environment",
    "NumericalError",
    "Session",
    "config",
    "derive_seed",
    "env_names",
    "git_blob_sha1",
    "her_relabel",
    "make_env",
    "preset",
    "preset_names",
    "report",
    "train",
    "untrained",
]


def preset(name):
    """Default run configuration of a named preset, as a dict."""
    return json.loads(_core.preset_json(name))


def config(preset_name="city-desk", **overrides):
    """Preset with top-level overrides applied and validated; nested sections merge."""
    cfg = preset(preset_name)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return json.loads(_core.normalize_config(json.dumps(cfg)))


def train(cfg):
    """Train from a config dict and return a Session."""
    return _core.train(json.dumps(cfg))


def untrained(cfg):
    return _core.untrained(json.dumps(cfg))


def report(session):
    """Training report of a Session as a dict."""
    return json.loads(session.report_json())
