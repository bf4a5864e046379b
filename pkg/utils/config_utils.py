"""
Configuration Utilities
Handles user defaults for synthesis and benchmark sweep descriptions.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from config.settings import Settings

logger = logging.getLogger(__name__)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigUtils:
    """Dot-key access to a JSON configuration layered over built-in defaults"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None):
        """Initialize configuration utilities"""
        self.config_file = Path(config_file) if config_file else Settings.get_config_path()
        self._config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self):
        """Load configuration from file"""
        self._config = self._get_default_config()
        if not self.config_file.exists():
            return
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading config {self.config_file}: {e}")
            return
        if not isinstance(loaded, dict):
            logger.error(f"Error loading config {self.config_file}: top level is not an object")
            return
        self._config = _deep_merge(self._config, loaded)

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration"""
        return {
            'version': Settings.APP_VERSION,
            'synthesis': {
                'ancillas': 24,
                'mode': 'size',
                'variant': 'default',
                'clean_ancillas': True,
                'reuse_inputs': False,
                'depth_fallback': True,
            },
            'lowering': {
                'toffoli_mode': 'exact',
                'mct_strategy': 'auto',
            },
            'verification': {
                'exhaustive_max_vars': Settings.EXHAUSTIVE_MAX_VARS,
                'samples': Settings.SAMPLED_INPUTS,
                'dirty_trials': Settings.DIRTY_TRIALS,
            },
            'performance': {
                'max_threads': Settings.MAX_THREADS,
                'chunk_size': Settings.CHUNK_SIZE,
            },
            'sweep': {
                'k': 3,
                'n_values': [40],
                'm': None,
                'ratio': None,
                'ladder': [40],
                'ladder_points': 8,
                'mode': 'size',
                'ensemble_size': Settings.ENSEMBLE_SIZE,
                'seed': None,
                'verify': True,
            },
        }

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        value = self._config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> bool:
        """Set configuration value (in memory; call save() to persist)"""
        keys = key.split('.')
        config = self._config
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value
        return True

    def update(self, updates: Dict[str, Any]) -> bool:
        """Update multiple configuration values"""
        for key, value in updates.items():
            self.set(key, value)
        return True

    def save(self) -> bool:
        """Save configuration to file"""
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self._config, f, indent=2, default=str)
            return True
        except OSError as e:
            logger.error(f"Error saving config: {e}")
            return False

    def reset_to_defaults(self) -> bool:
        """Reset configuration to defaults"""
        self._config = self._get_default_config()
        return True

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def get_performance_settings(self) -> Dict[str, Any]:
        """Get performance-related settings"""
        return {
            'max_threads': self.get('performance.max_threads', Settings.MAX_THREADS),
            'chunk_size': self.get('performance.chunk_size', Settings.CHUNK_SIZE),
        }

    def validate_config(self) -> Dict[str, Any]:
        """Validate configuration and return status"""
        validation_result = {
            'valid': True,
            'errors': [],
            'warnings': [],
        }

        def error(message: str):
            validation_result['errors'].append(message)
            validation_result['valid'] = False

        for key in ('synthesis', 'lowering', 'sweep'):
            if not isinstance(self._config.get(key), dict):
                error(f"Missing required key: {key}")
        if not validation_result['valid']:
            return validation_result

        ancillas = self.get('synthesis.ancillas')
        if not isinstance(ancillas, int) or ancillas < Settings.MIN_ANCILLAS:
            error(f"synthesis.ancillas must be an integer >= {Settings.MIN_ANCILLAS}")
        for key in ('synthesis.mode', 'sweep.mode'):
            if self.get(key) not in ('size', 'depth'):
                error(f"{key} must be 'size' or 'depth'")
        if self.get('synthesis.variant') not in ('default', 'small-ancilla', 'auto'):
            error("synthesis.variant must be 'default', 'small-ancilla' or 'auto'")
        if self.get('lowering.toffoli_mode') not in ('exact', 'approx'):
            error("lowering.toffoli_mode must be 'exact' or 'approx'")
        if self.get('lowering.mct_strategy') not in ('vchain', 'recursive', 'auto'):
            error("lowering.mct_strategy must be 'vchain', 'recursive' or 'auto'")

        k = self.get('sweep.k')
        n_values = self.get('sweep.n_values')
        ladder = self.get('sweep.ladder')
        if not isinstance(k, int) or k < 1:
            error("sweep.k must be a positive integer")
        if not isinstance(n_values, list) or not n_values or not all(isinstance(n, int) and n >= 1 for n in n_values):
            error("sweep.n_values must be a non-empty list of positive integers")
        elif isinstance(k, int) and any(n < k for n in n_values):
            error("sweep.n_values must not be below sweep.k")
        if ladder == 'auto':
            pass
        elif not isinstance(ladder, list) or not ladder or not all(isinstance(a, int) for a in ladder):
            error("sweep.ladder must be 'auto' or a non-empty list of integers")
        elif any(a < Settings.MIN_ANCILLAS for a in ladder):
            validation_result['warnings'].append(
                f"Ladder entries below {Settings.MIN_ANCILLAS} will be reported infeasible"
            )
        ensemble = self.get('sweep.ensemble_size')
        if not isinstance(ensemble, int) or ensemble < 1:
            error("sweep.ensemble_size must be a positive integer")
        if self.get('sweep.m') is None and self.get('sweep.ratio') is None and \
                isinstance(k, int) and Settings.get_phase_transition_ratio(k) is None:
            error(f"sweep.k={k} has no known threshold; set sweep.m or sweep.ratio")

        max_threads = self.get('performance.max_threads', 1)
        if not isinstance(max_threads, int) or max_threads < 1 or max_threads > 256:
            validation_result['warnings'].append("Invalid max_threads value")
        return validation_result
