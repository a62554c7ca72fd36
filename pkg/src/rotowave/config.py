"""Flat ``key = value`` run configuration.

One key per line, ``#`` starts a comment.  Values are numbers (``8*pi`` and
``pi`` are accepted), booleans, bare strings or bracketed lists of numbers.
Keys not listed in :data:`DEFAULTS` are rejected.
"""

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .fitting import is_geometric


class ConfigError(ValueError):
    pass


DEFAULTS = {
    # grid and physics
    "n": 64,
    "length": 8 * math.pi,
    "gamma_bar": 0.5,
    # cut-off
    "mode": "manual",
    "r": 0.5,
    "R": 4.0,
    "beta": 0.01,
    # regularity
    "s": 2.6,
    "s0": 0.5,
    "p": 1.5,
    "eta": 1.0,
    # sweeps
    "eps": 0.1,
    "eps_list": [0.1, 0.05, 0.025, 0.0125],
    "R_list": [2.0, 3.0, 4.0, 6.0],
    # solver (dt = 0 selects the data-dependent default)
    "dt": 0.0,
    "t_max": 1.0,
    "record_stride": 1,
    "blowup_threshold": 0.0,
    # data
    "seed": 0,
    "amplitude": 0.1,
    "data_width": 1.0,
    # spectrum-check
    "samples": 1000,
    # kernel-decay
    "tau_min": 10.0,
    "tau_max": 1000.0,
    "n_tau": 8,
    "branch": [1, 1],
    # strichartz-sweep
    "p_time": 4.0,
    "q_space": math.inf,
    "t_window": 0.25,
    # galerkin
    "n_max": 8,
    # execution
    "threads": 1,
    "out_dir": "rotowave_out",
}

_POSITIVE = {
    "length", "gamma_bar", "r", "R", "beta", "eta", "eps", "t_max", "samples",
    "tau_min", "tau_max", "p_time", "q_space", "t_window", "amplitude", "data_width",
}
_INTS = {"n", "record_stride", "seed", "samples", "n_tau", "n_max", "threads"}
_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def _number(text, key):
    text = text.strip()
    low = text.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return int(text) if re.fullmatch(r"[-+]?\d+", text) else float(text)
    except ValueError:
        pass
    m = _NUM.match(low)
    if m:
        return (float(m.group(1)) if m.group(1) else 1.0) * math.pi
    raise ConfigError(f"{key}: cannot parse {text!r} as a number")


def _parse_value(key, text):
    text = text.strip()
    default = DEFAULTS[key]
    if isinstance(default, list):
        if not (text.startswith("[") and text.endswith("]")):
            raise ConfigError(f"{key}: expected a bracketed list")
        body = text[1:-1].strip()
        return [_number(item, key) for item in body.split(",")] if body else []
    if isinstance(default, str):
        return text
    return _number(text, key)


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    def as_dict(self):
        return {k: (list(v) if isinstance(v, list) else v) for k, v in self.values.items()}

    def override(self, **changes):
        merged = dict(self.values)
        for k, v in changes.items():
            if v is None:
                continue
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
            merged[k] = v
        return validate(merged)


def validate(values):
    v = dict(values)
    for key in v:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
    for key in _INTS:
        if int(v[key]) != v[key]:
            raise ConfigError(f"{key} must be an integer")
        v[key] = int(v[key])
    for key in _POSITIVE:
        if not v[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if v["n"] < 8 or v["n"] % 2:
        raise ConfigError("n must be an even integer >= 8")
    if v["mode"] not in ("manual", "schedule"):
        raise ConfigError("mode must be 'manual' or 'schedule'")
    if not 0 < v["r"] < v["R"]:
        raise ConfigError("need 0 < r < R")
    if not v["s"] > 2.5:
        raise ConfigError("s must exceed 5/2")
    if not v["s0"] > 0:
        raise ConfigError("s0 must be positive")
    if not 1 < v["p"] < 2:
        raise ConfigError("p must satisfy 1 < p < 2")
    if not 0 < v["eps"] < 1:
        raise ConfigError("eps must lie in (0, 1)")
    eps_list = v["eps_list"]
    if len(eps_list) < 4 or any(not 0 < e < 1 for e in eps_list):
        raise ConfigError("eps_list needs at least four values in (0, 1)")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or not is_geometric(eps_list):
        raise ConfigError("eps_list must be a decreasing geometric sequence")
    R_list = v["R_list"]
    if len(R_list) < 3 or any(b <= a for a, b in zip(R_list, R_list[1:])) or R_list[0] <= 1:
        raise ConfigError("R_list needs at least three increasing values above 1")
    if v["dt"] < 0:
        raise ConfigError("dt must be nonnegative (0 selects the default)")
    if v["blowup_threshold"] < 0:
        raise ConfigError("blowup_threshold must be nonnegative (0 selects the default)")
    if v["record_stride"] < 1:
        raise ConfigError("record_stride must be >= 1")
    if v["tau_max"] <= v["tau_min"] or v["tau_min"] < 1:
        raise ConfigError("need 1 <= tau_min < tau_max")
    if v["n_tau"] < 6:
        raise ConfigError("n_tau must be >= 6")
    if tuple(v["branch"]) not in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        raise ConfigError("branch must be [+-1, +-1]")
    v["branch"] = [int(b) for b in v["branch"]]
    if v["q_space"] < 2:
        raise ConfigError("q_space must be >= 2")
    if v["n_max"] < 1:
        raise ConfigError("n_max must be >= 1")
    if v["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return RunConfig(v)


def parse_config(text, source="<string>"):
    values = dict(DEFAULTS)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        values[key] = _parse_value(key, value)
    return validate(values)


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), source=str(path))


def default_config():
    return validate(DEFAULTS)
