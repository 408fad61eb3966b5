"""Run configuration: one JSON document, defaults taken from the published settings."""

from __future__ import annotations

import copy
import json
from pathlib import Path

DEFAULTS: dict = {
    "seed": 1234,
    "model": {"n_sites": 4, "t": 1.0, "U": 4.0, "mu": None},
    "ground_state": {
        "source": "avqite",
        "distance_threshold": 1e-4,
        "dtau": 0.01,
        "max_tau": 30.0,
        "target_infidelity": 1e-4,
        "tikhonov_lambda": 1e-6,
    },
    "dynamics": {
        "l2_cut": 1e-3,
        "dt": 0.01,
        "total_time": 10.0,
        "phase_mode": "ansatz",
        "split_identity": True,
        "tikhonov_lambda": 1e-6,
        "pairs": None,
    },
    "greens": {"lesser_mode": "symmetry", "energy_from": "exact"},
    "spectrum": {"zeta": 0.5, "omega_min": -12.0, "omega_max": 12.0, "omega_step": 0.01,
                 "order": None},
    "shots": {"shots": 100000, "noise_p01": 0.02, "noise_p10": 0.02, "resample_dt": 0.05},
    "mitigation": {"k2_min": 0.0, "k2_max": 4.0, "k2_step": 0.1, "eps": 1e-4, "window": 9,
                   "polyorder": 3, "peak_only": False},
    "resources": {"trotter_delta": 4e-4, "vha_layers": None},
}

# command-line flag -> (section, key)
FLAG_MAP = {
    "n": ("model", "n_sites"),
    "u": ("model", "U"),
    "dt": ("dynamics", "dt"),
    "total_time": ("dynamics", "total_time"),
    "l2_cut": ("dynamics", "l2_cut"),
    "zeta": ("spectrum", "zeta"),
    "shots": ("shots", "shots"),
    "noise_p01": ("shots", "noise_p01"),
    "noise_p10": ("shots", "noise_p10"),
}


class ConfigError(ValueError):
    pass


def merge(base: dict, update: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be an object")
            out[key] = merge(base[key], val, f"{path}{key}.")
        else:
            out[key] = val
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file at ``path``, then flag overrides (``None`` values skipped)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        cfg = merge(cfg, user)
    for flag, val in (overrides or {}).items():
        if val is None:
            continue
        if flag == "seed":
            cfg["seed"] = val
            continue
        section, key = FLAG_MAP[flag]
        cfg[section][key] = val
    return cfg


def k2_grid(cfg: dict) -> list[float]:
    m = cfg["mitigation"]
    n = int(round((m["k2_max"] - m["k2_min"]) / m["k2_step"]))
    return [round(m["k2_min"] + i * m["k2_step"], 10) for i in range(n + 1)]
