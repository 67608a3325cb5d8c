"""Macro/femto uplink cooperation through spectrum leasing: simulator, formation game and experiments."""

from .config import ConfigError, ScenarioConfig, load_config
from .engine import ModelParams, PartitionState, RoundModel

__all__ = ["ConfigError", "ModelParams", "PartitionState", "RoundModel", "ScenarioConfig", "load_config"]
__version__ = "0.1.0"
