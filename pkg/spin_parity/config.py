"""Application configuration: defaults for runs and output."""
import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

DEFAULTS: Dict[str, Any] = {
    "simulation": {
        "trials": 10000,
        "seed": 0,
        "workers": 1,
        "max_depth": 24,
        "fold_interchangeable": True,
    },
    "output": {
        "format": "text",
        "confidence": 0.99,
    },
    "logging": {
        "level": "WARNING",
    },
}

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into ``base``."""
    for key, value in update.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value
    return base


class Config:
    """Simulator settings, built-in defaults overlaid with an optional file."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration.

        Args:
            config_path: Path to configuration file (YAML or JSON)
        """
        self.config = copy.deepcopy(DEFAULTS)
        if config_path:
            self.load(config_path)

    def load(self, config_path: str):
        """Load a configuration file over the defaults.

        Args:
            config_path: Path to configuration file
        """
        path = Path(config_path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        with open(path, 'r', encoding='utf-8') as f:
            if path.suffix in ['.yaml', '.yml']:
                loaded = yaml.safe_load(f) or {}
            elif path.suffix == '.json':
                loaded = json.load(f)
            else:
                raise ValueError(f"Unsupported configuration format: {path.suffix}")
        if not isinstance(loaded, dict):
            raise ValueError(f"Configuration file must hold a mapping: {config_path}")

        self.config = _deep_merge(copy.deepcopy(DEFAULTS), loaded)
        self.validate()

    def validate(self):
        """Reject values the simulator cannot use."""
        if self.get('simulation.workers', 1) < 1:
            raise ValueError(f"simulation.workers must be >= 1, got {self.get('simulation.workers')}")
        if self.get('simulation.max_depth', 1) < 1:
            raise ValueError(f"simulation.max_depth must be >= 1, got {self.get('simulation.max_depth')}")
        confidence = self.get('output.confidence')
        if not 0.0 < confidence < 1.0:
            raise ValueError(f"output.confidence must be in (0, 1), got {confidence}")
        if str(self.get('logging.level')).upper() not in _LOG_LEVELS:
            raise ValueError(f"Unknown logging.level: {self.get('logging.level')}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation key.

        Args:
            key: Configuration key (e.g., 'simulation.trials')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        value = self.config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        """Set configuration value by dot-notation key."""
        keys = key.split('.')
        config = self.config
        for k in keys[:-1]:
            config = config.setdefault(k, {})
        config[keys[-1]] = value

    def scenario_defaults(self) -> Dict[str, Any]:
        """Values used for scenario keys a scenario file leaves out."""
        return {
            "trials": self.get('simulation.trials'),
            "seed": self.get('simulation.seed'),
            "format": self.get('output.format'),
        }

    @property
    def log_level(self) -> int:
        return getattr(logging, str(self.get('logging.level', 'WARNING')).upper())

    def save(self, config_path: str):
        """Save configuration to file.

        Args:
            config_path: Path to save configuration
        """
        path = Path(config_path)
        if path.suffix not in ['.yaml', '.yml', '.json']:
            raise ValueError(f"Unsupported configuration format: {path.suffix}")
        with open(path, 'w', encoding='utf-8') as f:
            if path.suffix == '.json':
                json.dump(self.config, f, indent=2)
            else:
                yaml.safe_dump(self.config, f, default_flow_style=False)
