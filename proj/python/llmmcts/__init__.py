"""LLM-guided Monte Carlo tree search planner for household rearrangement."""

import json
import os

from . import _core
from ._core import (
    empirical_policy_from_scores,
    fixture_key,
    ground_name,
    sem_percent,
    sha256_hex,
    softmax,
)

__all__ = [
    "admissible_labels",
    "empirical_policy_from_scores",
    "fixture_key",
    "ground_name",
    "run_eval",
    "sem_percent",
    "sha256_hex",
    "softmax",
]


def run_eval(config, base_dir="."):
    """Run an evaluation; `config` is a RunConfig dict or a path to a config file."""
    if isinstance(config, (str, os.PathLike)):
        base_dir = os.path.dirname(os.path.abspath(config))
        with open(config) as f:
            config = json.load(f)
    return json.loads(_core.run_eval_json(json.dumps(config), str(base_dir)))


def admissible_labels(scene):
    """Admissible action labels for a scene dict."""
    return _core.admissible_labels(json.dumps(scene))
