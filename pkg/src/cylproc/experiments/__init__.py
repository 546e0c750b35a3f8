"""Configuration, execution and output of experiments."""

from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .records import COLUMNS, ResultRecord, emit, read_records
from .runner import run

__all__ = ["ConfigError", "ExperimentConfig", "config_from_dict", "load_config",
           "COLUMNS", "ResultRecord", "emit", "read_records", "run"]
