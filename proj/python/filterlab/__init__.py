"""Python access to the tabular imitation/IRL laboratory."""

import json

from ._core import (
    ConfigurationError,
    IoError,
    StructuralError,
    audit,
    discriminator_variance,
    forked_tree_expected_tables,
    forked_tree_tables,
    hoeffding_sample_size,
    policy_value,
    replay,
)
from ._core import run as _run


def run(env, algorithm, settings=None, seed=0):
    """Transcript of one run, parsed into a dict."""
    text = _run(env, algorithm, {k: str(v) for k, v in (settings or {}).items()}, seed)
    return json.loads(text)


def run_text(env, algorithm, settings=None, seed=0):
    return _run(env, algorithm, {k: str(v) for k, v in (settings or {}).items()}, seed)


__all__ = [
    "ConfigurationError",
    "IoError",
    "StructuralError",
    "audit",
    "discriminator_variance",
    "forked_tree_expected_tables",
    "forked_tree_tables",
    "hoeffding_sample_size",
    "policy_value",
    "replay",
    "run",
    "run_text",
]
