"""
Configuration management for haar_factor.
"""

import os
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Any, Optional, List, Tuple

from ..core.errors import InputFormatError, PreconditionError


def parse_rational(value: Any, name: str = "value") -> Fraction:
    """Parse "p/q", decimal or integer text (or a number) into an exact Fraction."""
    if isinstance(value, bool):
        raise InputFormatError(f"{name} must be rational, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InputFormatError(f"{name} must be rational, got {value!r}") from e


class Config:
    """
    JSON-file backed settings with dot-notation access.
    """

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or os.path.expanduser("~/.haar_factor.json")
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file, falling back to defaults."""
        config = self._get_default_config()
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r') as f:
                    stored = json.load(f)
                if isinstance(stored, dict):
                    self._deep_merge(config, stored)
            except (json.JSONDecodeError, IOError):
                pass
        return config

    def _get_default_config(self) -> Dict[str, Any]:
        return {
            "construction": {
                "depth_budget": 16,
                "ascent_iterations": 500
            },
            "factorization": {
                "tol": "1/1099511627776",
                "exhaustive_limit": 12,
                "random_witnesses": 32,
                "neumann_precision_bits": 96,
                "emit_matrices": False
            },
            "parallel": {
                "threads": None
            },
            "output": {
                "verbose": False,
                "log_level": "info"
            }
        }

    def save_config(self):
        """Save current configuration to file."""
        try:
            directory = os.path.dirname(self.config_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.config_file, 'w') as f:
                json.dump(self.config, f, indent=2)
        except IOError as e:
            print(f"Warning: Could not save config file: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        keys = key.split('.')
        value = self.config
        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        keys = key.split('.')
        config = self.config
        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    def update(self, updates: Dict[str, Any]):
        for key, value in updates.items():
            self.set(key, value)

    def reset_to_defaults(self):
        self.config = self._get_default_config()

    def get_construction_config(self) -> Dict[str, Any]:
        return self.config.get("construction", {})

    def get_factorization_config(self) -> Dict[str, Any]:
        return self.config.get("factorization", {})

    def get_parallel_config(self) -> Dict[str, Any]:
        return self.config.get("parallel", {})

    def get_output_config(self) -> Dict[str, Any]:
        return self.config.get("output", {})

    def tolerance(self) -> Fraction:
        return parse_rational(self.get("factorization.tol", "1/1099511627776"), "factorization.tol")

    def export_config(self, file_path: str):
        with open(file_path, 'w') as f:
            json.dump(self.config, f, indent=2)

    def import_config(self, file_path: str):
        """Merge settings from a file into the current configuration."""
        with open(file_path, 'r') as f:
            imported_config = json.load(f)
        self._deep_merge(self.config, imported_config)

    def _deep_merge(self, base: Dict[str, Any], update: Dict[str, Any]):
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = value

    def validate_config(self) -> Tuple[bool, List[str]]:
        errors = []

        budget = self.get("construction.depth_budget")
        if not isinstance(budget, int) or budget < 0:
            errors.append("construction.depth_budget must be a nonnegative integer")

        iterations = self.get("construction.ascent_iterations")
        if not isinstance(iterations, int) or iterations <= 0:
            errors.append("construction.ascent_iterations must be a positive integer")

        try:
            if self.tolerance() <= 0:
                errors.append("factorization.tol must be positive")
        except InputFormatError:
            errors.append("factorization.tol must be a rational string such as '1/1024'")

        for key in ("factorization.exhaustive_limit", "factorization.random_witnesses"):
            value = self.get(key)
            if not isinstance(value, int) or value < 0:
                errors.append(f"{key} must be a nonnegative integer")

        bits = self.get("factorization.neumann_precision_bits")
        if bits is not None and (not isinstance(bits, int) or bits <= 0):
            errors.append("factorization.neumann_precision_bits must be a positive integer or null")

        threads = self.get("parallel.threads")
        if threads is not None and (not isinstance(threads, int) or threads <= 0):
            errors.append("parallel.threads must be a positive integer or null")

        if self.get("output.log_level") not in ("debug", "info", "warning", "error"):
            errors.append("output.log_level must be one of: debug, info, warning, error")

        return len(errors) == 0, errors

    def __str__(self) -> str:
        return json.dumps(self.config, indent=2)

    def __repr__(self) -> str:
        return f"Config(file='{self.config_file}')"


@dataclass
class RunConfig:
    """Parameters of one command invocation, parsed exactly."""

    command: str = ""
    depth: Optional[int] = None
    index_depth: Optional[int] = None
    delta: Optional[Fraction] = None
    eta: Optional[Fraction] = None
    tol: Fraction = Fraction(1, 1 << 40)
    seed: int = 0
    input_path: Optional[str] = None
    operator_path: Optional[str] = None
    output_path: Optional[str] = None
    emit_matrices: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_params(cls, command: str, params: Dict[str, Any], config: Optional[Config] = None) -> "RunConfig":
        config = config or Config()
        run = cls(command=command)
        if params.get("depth") is not None:
            run.depth = int(params["depth"])
        if params.get("index_depth") is not None:
            run.index_depth = int(params["index_depth"])
        if params.get("delta") is not None:
            run.delta = parse_rational(params["delta"], "delta")
        if params.get("eta") is not None:
            run.eta = parse_rational(params["eta"], "eta")
        run.tol = parse_rational(params["tol"], "tol") if params.get("tol") is not None else config.tolerance()
        run.seed = int(params.get("seed") or 0)
        run.input_path = params.get("input")
        run.operator_path = params.get("operator")
        run.output_path = params.get("output")
        run.emit_matrices = bool(params.get("emit_matrices") or config.get("factorization.emit_matrices", False))
        known = {"depth", "index_depth", "delta", "eta", "tol", "seed", "input", "operator", "output", "emit_matrices"}
        run.extra = {k: v for k, v in params.items() if k not in known}
        run.validate()
        return run

    def validate(self):
        if self.delta is not None and self.delta < 0:
            raise PreconditionError(f"delta must be nonnegative, got {self.delta}")
        if self.eta is not None and self.eta <= 0:
            raise PreconditionError(f"eta must be positive, got {self.eta}")
        if self.tol <= 0:
            raise PreconditionError(f"tol must be positive, got {self.tol}")
        if self.index_depth is not None and self.index_depth < 0:
            raise PreconditionError(f"index_depth must be nonnegative, got {self.index_depth}")
        if self.depth is not None and self.index_depth is not None and self.index_depth > self.depth:
            raise PreconditionError(f"index_depth {self.index_depth} exceeds depth {self.depth}")
