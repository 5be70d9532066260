"""Python front end for the pivotwalk experiments."""

import json

from ._pivotwalk import (
    ConfigError,
    Word,
    classify,
    cli,
    config_hash,
    default_config,
    plane_distance,
    schema_version,
    suite_names,
    translation_length,
)
from ._pivotwalk import run_suite_json as _run_suite_json


def run_suite(name, seed, config_yaml="", trials=None, threads=1):
    """Run a suite in process and return the report as a dict."""
    return json.loads(_run_suite_json(name, config_yaml, seed, trials, threads))


__all__ = [
    "ConfigError",
    "Word",
    "classify",
    "cli",
    "config_hash",
    "default_config",
    "plane_distance",
    "run_suite",
    "schema_version",
    "suite_names",
    "translation_length",
]
