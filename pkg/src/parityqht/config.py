from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from parityqht.types import ToleranceDict

DENSE_CAP_ENV = "PARITYQHT_DENSE_CAP"
GRID_CAP_ENV = "PARITYQHT_MAX_GRID_POINTS"

DEFAULT_DENSE_QUBITS = 10
HARD_DENSE_QUBITS = 14

# fixed; not settable from a config file
HERMITIAN_TOL = 1e-12
EIG_RESIDUAL_TOL = 1e-10


class ConfigError(ValueError):
    """Raised when a settings file or environment value is invalid. Caller decides how to display."""


@dataclass(frozen=True)
class Settings:
    """Numerical tolerances and resource caps shared by the CLI and sweeps."""

    classify_tol: float = 1e-12
    duality_tol: float = 1e-8
    max_dense_qubits: int = DEFAULT_DENSE_QUBITS
    max_grid_points: int = 100_000
    max_critical_iterations: int = 1_000_000
    max_search_iterations: int = 200

    def tolerances(self) -> ToleranceDict:
        return {
            "classify": self.classify_tol,
            "duality": self.duality_tol,
            "eig_residual": EIG_RESIDUAL_TOL,
            "hermitian": HERMITIAN_TOL,
        }


def read_dotenv(dotenv_path: Path) -> dict[str, str]:
    """Read a .env file and return key=value pairs as a dict."""
    env = {}
    if not dotenv_path.exists():
        return env
    for line in dotenv_path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        # Strip surrounding quotes
        if len(value) >= 2 and value[0] == value[-1] and value[0] in ('"', "'"):
            value = value[1:-1]
        env[key] = value
    return env


def _parse_positive_int(name: str, raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got '{raw}'") from None
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def dense_cap() -> int:
    """Maximum number of qubits for dense 2^n matrices.

    Reads PARITYQHT_DENSE_CAP from the process environment, default 10.
    """
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_DENSE_QUBITS
    value = _parse_positive_int(DENSE_CAP_ENV, raw.strip())
    if value > HARD_DENSE_QUBITS:
        raise ConfigError(f"{DENSE_CAP_ENV}={value} exceeds the supported maximum {HARD_DENSE_QUBITS}")
    return value


def load_settings_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(Settings)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown settings in {path}: {', '.join(unknown)}")
    return data


def _coerce(overrides: dict) -> dict:
    base = Settings()
    out = {}
    for key, value in overrides.items():
        default = getattr(base, key)
        if isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"setting '{key}' must be a positive integer, got {value!r}")
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"setting '{key}' must be a positive number, got {value!r}")
            value = float(value)
        out[key] = value
    return out


def load_settings(cwd: Path, config_path: Path | None = None) -> Settings:
    """Resolve settings: defaults, then JSON file, then .env, then environment."""
    overrides: dict = {}
    if config_path is not None:
        overrides.update(load_settings_file(config_path))

    dotenv_vars = read_dotenv(cwd / ".env")
    for env_var, key in ((DENSE_CAP_ENV, "max_dense_qubits"), (GRID_CAP_ENV, "max_grid_points")):
        raw = os.environ.get(env_var) or dotenv_vars.get(env_var)
        if raw:
            overrides[key] = _parse_positive_int(env_var, raw.strip())

    settings = replace(Settings(), **_coerce(overrides))
    if settings.max_dense_qubits > HARD_DENSE_QUBITS:
        raise ConfigError(
            f"max_dense_qubits={settings.max_dense_qubits} exceeds the supported maximum {HARD_DENSE_QUBITS}"
        )
    return settings
