"""INI-style run configuration; command-line flags override file values.

Recognised keys, by section::

    [network]  n, mode, side_length, seed, alpha, power
    [social]   gamma, q, q_growth
    [mh]       cell_area, cell_area_factor, tdma_t
    [hc]       epsilon, subnets, cluster_fraction, trials, b
    [sweep]    variable, values, protocol, workers
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigurationError

DEFAULTS = {
    "n": 256, "mode": "dense", "side_length": None, "seed": 0, "alpha": 3.0, "power": 1.0,
    "gamma": 0.0, "q": 1, "q_growth": "constant",
    "cell_area": None, "cell_area_factor": 2.0, "tdma_t": 9,
    "epsilon": 0.05, "subnets": None, "cluster_fraction": 0.5, "trials": 20, "b": 0.25,
    "variable": "n", "values": None, "protocol": "mh", "workers": 1,
}

SECTIONS = {
    "network": ("n", "mode", "side_length", "seed", "alpha", "power"),
    "social": ("gamma", "q", "q_growth"),
    "mh": ("cell_area", "cell_area_factor", "tdma_t"),
    "hc": ("epsilon", "subnets", "cluster_fraction", "trials", "b"),
    "sweep": ("variable", "values", "protocol", "workers"),
}

_INT = {"n", "seed", "q", "tdma_t", "subnets", "trials", "workers"}
_FLOAT = {"side_length", "alpha", "power", "gamma", "cell_area", "cell_area_factor",
          "epsilon", "cluster_fraction", "b"}


def _convert(key: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("", "none", "auto"):
        return None
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from None
    if key == "values":
        return parse_values(raw)
    return raw


def parse_values(raw: str) -> tuple:
    out = []
    for tok in str(raw).split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            v = float(tok)
        except ValueError:
            raise ConfigurationError(f"sweep value {tok!r} is not a number") from None
        out.append(int(v) if v.is_integer() and "." not in tok and "e" not in tok.lower() else v)
    return tuple(out)


def load_config(path: str | Path | None) -> dict:
    """Defaults updated with the values found in ``path``."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigurationError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")
            cfg[key] = _convert(key, raw)
    return cfg


def merge(cfg: dict, overrides: dict) -> dict:
    """``cfg`` with every non-``None`` override applied."""
    out = dict(cfg)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out
