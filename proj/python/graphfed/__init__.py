"""Distributed GCN training simulator (Python bindings).

Configs are plain dicts using the same layout as the CLI's config.json;
missing keys take their defaults.
"""

import json
from os import PathLike
from typing import Any, Dict, List, Union

from ._core import (
    ConfigError,
    Dataset,
    InputError,
    ProtocolError,
    SbmConfig,
    cut_edges,
    delete_training_vertices,
    generate_sbm,
    micro_f1,
    nts,
    overhead_of,
    partition,
    sample_from_partition,
    write_report,
)
from . import _core

Config = Dict[str, Any]
PathType = Union[str, PathLike]

__all__ = [
    "ConfigError", "Dataset", "InputError", "ProtocolError", "SbmConfig", "cut_edges",
    "default_config", "delete_training_vertices", "generate_sbm", "micro_f1", "nts",
    "overhead_of", "partition", "run_experiment", "run_resilience", "run_sweep",
    "sample_from_partition", "train", "write_report",
]


def default_config() -> Config:
    return json.loads(_core.default_config())


def _full(config: Config = None) -> str:
    base = _core.default_config()
    return _core.merge_config(json.dumps(config or {}), base)


def train(config: Config = None) -> Dict[str, Any]:
    """Train once in memory; returns test_f1, best_epoch and per-epoch reports."""
    return _core.train(_full(config))


def run_experiment(config: Config, out_dir: PathType) -> Dict[str, Any]:
    return _core.run_experiment(_full(config), out_dir)


def run_sweep(config: Config, out_dir: PathType) -> List[Dict[str, Any]]:
    return _core.run_sweep(_full(config), out_dir)


def run_resilience(config: Config, out_dir: PathType) -> List[Dict[str, Any]]:
    return _core.run_resilience(_full(config), out_dir)
