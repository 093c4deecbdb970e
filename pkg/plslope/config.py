import os
import copy
import json
import hashlib

import yaml

from deepdiff import DeepDiff

from plslope import logger

CONFIG_ENV = "PLSLOPE_CONFIG"

DEFAULTS = {
    "core": {
        "lap_budget": 200000,
        "node_budget": 2000000,
    },
    "entropy": {
        "lap_depth": 18,
        "lap_budget": 1000000,
        "fit_window": 0.5,
        "horseshoe_power": 2,
        "markov_steps": 100,
        "perron_tol": "1/1000000000",
        "grid_size": 16384,
        "max_iter": 5000,
        "tol": 1e-10,
        "shift": 1.0,
        "stable_steps": 5,
    },
    "parry": {
        "tol": 1e-10,
        "max_iter": 5000,
        "breakpoint_cap": 32768,
        "min_psi_slope": 1e-6,
        "markov_points": 32768,
        "cross_check": True,
        "check_depth": 8,
    },
    "hofbauer": {
        "word_cap": 30,
        "vertex_cap": 10000,
        "loop_n": 30,
        "recurrence_threshold": 1e-3,
    },
    "checks": {
        "eps_floor": "1/64",
        "k_max": 40,
        "orbit_depth": 40,
        "orbit_cap": 200,
    },
    "lab": {
        "preimage_n": 12,
        "ratio_threshold": 0.1,
        "eps_list": [0.2, 0.1, 0.05],
        "threads": 1,
    },
    "cli": {
        "log_level": "WARNING",
        "log2": False,
    },
}

class ConfigError(ValueError):
    pass

def _merge(base, override, path=""):
    for key, value in override.items():
        where = "{}.{}".format(path, key) if path else key
        if key not in base:
            raise ConfigError("unknown config key: {}".format(where))
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("config section {} must be a mapping".format(where))
            _merge(base[key], value, where)
        else:
            base[key] = value

class Config():
    def __init__(self, values=None, source=None):
        self._values = copy.deepcopy(DEFAULTS)
        self.source = source
        if values:
            if not isinstance(values, dict):
                raise ConfigError("config root must be a mapping")
            _merge(self._values, values)

    def get(self, section, key):
        try:
            return self._values[section][key]
        except KeyError:
            raise ConfigError("unknown config key: {}.{}".format(section, key))

    def set(self, section, key, value):
        _merge(self._values, {section: {key: value}})

    def section(self, name):
        if name not in self._values:
            raise ConfigError("unknown config section: {}".format(name))
        return dict(self._values[name])

    def as_dict(self):
        return copy.deepcopy(self._values)

    def to_json(self):
        return json.dumps(self._values, sort_keys=True)

    def digest(self):
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def overrides(self):
        return DeepDiff(DEFAULTS, self._values)

def load_config(path=None):
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return Config()
    try:
        with open(path, "r") as tf:
            values = yaml.load(tf, Loader=yaml.FullLoader)
    except OSError as err:
        raise ConfigError("cannot read config {}: {}".format(path, err))
    except yaml.YAMLError as err:
        raise ConfigError("invalid config {}: {}".format(path, err))
    logger().debug("config loaded from %s", path)
    return Config(values or {}, source=path)
