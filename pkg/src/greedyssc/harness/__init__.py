"""Configuration, persistence and experiment drivers for the ``ssc`` CLI."""

from .commands import COMMANDS, derived_seed
from .config import ConfigError, build_config, load_config
from .io import ResultTable, load_dataset, read_table, save_dataset, table_body

__all__ = [
    "COMMANDS",
    "ConfigError",
    "ResultTable",
    "build_config",
    "derived_seed",
    "load_config",
    "load_dataset",
    "read_table",
    "save_dataset",
    "table_body",
]
