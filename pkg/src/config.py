"""Configuration management."""
import os
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv

# Load environment variables (BLOWUPLAB_THREADS, CONFIG_PATH)
load_dotenv()


class Config:
    """Configuration manager."""

    _instance = None

    def __new__(cls, config_path: str = None):
        """Singleton pattern to ensure single config instance."""
        if cls._instance is None:
            cls._instance = super(Config, cls).__new__(cls)
        return cls._instance

    def __init__(self, config_path: str = None):
        """Initialize configuration."""
        if config_path is None:
            config_path = os.getenv('CONFIG_PATH', 'config.yaml')
        self.config_path = config_path
        self.config = self._load_config()

    def reload(self, config_path: Optional[str] = None) -> None:
        """Re-read the YAML file, optionally from a new path."""
        if config_path is not None:
            self.config_path = config_path
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file, layered over the defaults."""
        merged = self._default_config()
        if not os.path.exists(self.config_path):
            return merged

        with open(self.config_path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}
        for section, values in loaded.items():
            if isinstance(values, dict) and isinstance(merged.get(section), dict):
                merged[section].update(values)
            else:
                merged[section] = values
        return merged

    def _default_config(self) -> Dict[str, Any]:
        """Return default configuration."""
        return {
            'specialfn': {
                'rmin': 1e-8,
                'rmax': 700.0,
                'oracle_grid': 1000,
                'ode_grid': 1000,
                'window_grid': 40,
                'oracle_rel_tol': 1e-12,
                'ode_rel_tol': 1e-8,
                'fd_rel_tol': 1e-6,
            },
            'geometry': {
                'rho_floor': 1e-3,
                'chart_radius_factor': 0.1,
                'max_halvings': 10,
                'graph_fit_tol': 1e-7,
                'fd_step': 1e-5,
                'n_seeds': 2000,
                'scan_points': 500,
                'dedup_angle': 1e-3,
                'constant_spread': 1e-8,
                'max_starts': 64,
            },
            'quadrature': {
                'rel_tol_smooth': 1e-6,
                'rel_tol_energy': 1e-4,
                'abs_tol': 1e-12,
                'grading_ratio': 0.5,
                'min_panel_factor': 0.1,
                'orders': [4, 6, 8, 12, 16],
                'max_evals': 10_000_000,
                'cap_angle': 0.5,
                'global_panels': 12,
                'workers': 4,
            },
            'energy': {
                'eta': 0.5,
                'd': [1.0, 1.0],
            },
            'asymptotics': {
                'lambda_grid': [1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4],
                'flatness_slope': 0.1,
                'agreement': 0.1,
                'r2_min': 0.99,
                'ratio_band': 10.0,
                'energy_rel_tol': 1e-10,
                'minimize_xtol': 1e-4,
                'minimize_sweeps': 3,
            },
            'runtime': {
                'threads': 1,
            },
            'output': {
                'output_directory': 'output',
                'float_format': '%.15g',
            },
            'logging': {
                'level': 'INFO',
                'file': None,
            },
        }

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value by dot-separated path."""
        keys = key_path.split('.')
        value = self.config
        for key in keys:
            if isinstance(value, dict):
                value = value.get(key)
                if value is None:
                    return default
            else:
                return default
        return value

    def get_threads(self, override: Optional[int] = None) -> int:
        """Worker count: explicit flag, then BLOWUPLAB_THREADS, then YAML."""
        if override is not None:
            return max(1, int(override))
        env_value = os.getenv('BLOWUPLAB_THREADS')
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError:
                pass
        return max(1, int(self.get('runtime.threads', 1)))

    @property
    def quadrature_orders(self) -> List[int]:
        """Gauss-Legendre order schedule used for nested error estimates."""
        return list(self.get('quadrature.orders', [4, 6, 8, 12, 16]))

    @property
    def rel_tol_smooth(self) -> float:
        """Relative tolerance for smooth integrands."""
        return self.get('quadrature.rel_tol_smooth', 1e-6)

    @property
    def rel_tol_energy(self) -> float:
        """Relative tolerance for bubble-singular energy terms."""
        return self.get('quadrature.rel_tol_energy', 1e-4)

    @property
    def lambda_grid(self) -> List[float]:
        """Default lambda grid for scaling runs."""
        return [float(v) for v in self.get('asymptotics.lambda_grid')]

    @property
    def output_directory(self) -> str:
        """Get output directory."""
        return self.get('output.output_directory', 'output')

    @property
    def float_format(self) -> str:
        """printf-style format used for CSV floats."""
        return self.get('output.float_format', '%.15g')


# Global config instance
config = Config()
