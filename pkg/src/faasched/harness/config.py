"""Experiment configuration: INI-style sections, strict key validation.

Every key is optional and falls back to a documented default, but unknown
sections or keys are errors, as are values failing a hyperparameter's range
check. Overrides arrive as `section.key=value` strings from the CLI.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from ..agents.dqn import DqnHyper
from ..agents.ppo import PpoHyper
from ..costs import CostParams
from ..env import DEFAULT_F_CAP, DEFAULT_KEEPALIVE_SLOTS
from ..topology import DEFAULT_NODE_CLASSES


class ConfigError(ValueError):
    """Bad configuration: unknown key, malformed value, or failed validation."""


@dataclass
class TopologyConfig:
    nodes_file: str | None = None
    edges_file: str | None = None
    n_nodes: int = 5
    area_m: float = 1000.0
    radius_m: float = 600.0
    classes: tuple[tuple[float, int], ...] = DEFAULT_NODE_CLASSES


@dataclass
class CatalogConfig:
    file: str | None = None
    budget_override: str | None = None  # decimal dollars, or 'inf' for unlimited


@dataclass
class TraceConfig:
    file: str | None = None
    horizon: int = 12
    arrival_rate: float = 1.5
    mix: tuple[float, ...] | None = None  # None: uniform over the catalog


@dataclass
class EnvConfig:
    keepalive_slots: int = DEFAULT_KEEPALIVE_SLOTS
    f_cap: int = DEFAULT_F_CAP


@dataclass
class CompareConfig:
    schedulers: tuple[str, ...] = ("greedy", "random", "dqn", "ppo")
    eval_episodes: int = 50
    train_episodes: int = 500
    oracle_max_states: int = 2_000_000


KNOWN_SCHEDULERS = ("dqn", "ppo", "greedy", "random", "oracle")


@dataclass
class Config:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    catalog: CatalogConfig = field(default_factory=CatalogConfig)
    trace: TraceConfig = field(default_factory=TraceConfig)
    costs: CostParams = field(default_factory=CostParams)
    env: EnvConfig = field(default_factory=EnvConfig)
    dqn: DqnHyper = field(default_factory=DqnHyper)
    ppo: PpoHyper = field(default_factory=PpoHyper)
    compare: CompareConfig = field(default_factory=CompareConfig)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_classes(text: str) -> tuple[tuple[float, int], ...]:
    out = []
    for part in text.split(","):
        cpu, _, mem = part.strip().partition(":")
        out.append((float(cpu), int(mem)))
    if not out:
        raise ValueError("empty class list")
    return tuple(out)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(","))


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _parse_optional_str(text: str) -> str | None:
    return text.strip() or None


# section -> key -> parser. Sections map onto the dataclasses of Config.
_PARSERS = {
    "topology": {
        "nodes_file": _parse_optional_str,
        "edges_file": _parse_optional_str,
        "n_nodes": int,
        "area_m": float,
        "radius_m": float,
        "classes": _parse_classes,
    },
    "catalog": {
        "file": _parse_optional_str,
        "budget_override": _parse_optional_str,
    },
    "trace": {
        "file": _parse_optional_str,
        "horizon": int,
        "arrival_rate": float,
        "mix": _parse_float_list,
    },
    "costs": {
        "alpha_switch": float,
        "beta_run": float,
        "delta_route": float,
        "reject_penalty": float,
    },
    "env": {
        "keepalive_slots": int,
        "f_cap": int,
    },
    "dqn": {
        "gamma": float,
        "lr": float,
        "epsilon_start": float,
        "epsilon_end": float,
        "epsilon_decay_steps": int,
        "batch_size": int,
        "target_sync_period": int,
        "buffer_capacity": int,
        "hidden": _parse_int_list,
    },
    "ppo": {
        "gamma": float,
        "lr": float,
        "clip_ratio": float,
        "rollout_steps": int,
        "epochs": int,
        "minibatch_size": int,
        "gae_lambda": float,
        "vf_coef": float,
        "ent_coef": float,
        "hidden": _parse_int_list,
    },
    "compare": {
        "schedulers": _parse_str_list,
        "eval_episodes": int,
        "train_episodes": int,
        "oracle_max_states": int,
    },
}

_FROZEN_SECTIONS = {"costs": CostParams, "dqn": DqnHyper, "ppo": PpoHyper}


def load_config(path=None, overrides: list[str] | None = None) -> Config:
    """Read a config file (optional) and apply `section.key=value` overrides."""
    values: dict[str, dict[str, str]] = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as f:
                parser.read_file(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        for section in parser.sections():
            values[section] = dict(parser.items(section))
    for item in overrides or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        section, sep, name = key.strip().partition(".")
        if not sep:
            raise ConfigError(f"override key must be section.key: {key!r}")
        values.setdefault(section, {})[name.strip()] = raw.strip()
    return _build_config(values)


def _build_config(values: dict[str, dict[str, str]]) -> Config:
    for section in values:
        if section not in _PARSERS:
            raise ConfigError(f"unknown config section [{section}]")
    parsed: dict[str, dict] = {}
    for section, keys in values.items():
        section_parsers = _PARSERS[section]
        parsed[section] = {}
        for key, raw in keys.items():
            if key not in section_parsers:
                raise ConfigError(f"unknown config key {section}.{key}")
            try:
                parsed[section][key] = section_parsers[key](raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from exc

    config = Config()
    for section, kv in parsed.items():
        if section in _FROZEN_SECTIONS:
            try:
                setattr(config, section, _FROZEN_SECTIONS[section](**kv))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {exc}") from exc
        else:
            target = getattr(config, section)
            for key, value in kv.items():
                setattr(target, key, value)
    _validate(config)
    return config


def _validate(config: Config) -> None:
    t = config.topology
    if (t.nodes_file is None) and (t.edges_file is not None):
        raise ConfigError("topology.edges_file requires topology.nodes_file")
    if t.n_nodes < 1:
        raise ConfigError("topology.n_nodes must be >= 1")
    if t.radius_m <= 0 or t.area_m <= 0:
        raise ConfigError("topology.radius_m and area_m must be > 0")
    if config.trace.arrival_rate < 0:
        raise ConfigError("trace.arrival_rate must be >= 0")
    if config.trace.horizon < 0:
        raise ConfigError("trace.horizon must be >= 0")
    if config.env.keepalive_slots < 0:
        raise ConfigError("env.keepalive_slots must be >= 0")
    if config.env.f_cap < 1:
        raise ConfigError("env.f_cap must be >= 1")
    c = config.compare
    for scheduler in c.schedulers:
        if scheduler not in KNOWN_SCHEDULERS:
            raise ConfigError(f"unknown scheduler {scheduler!r} in compare.schedulers")
    if c.eval_episodes < 1 or c.train_episodes < 0:
        raise ConfigError("compare.eval_episodes must be >= 1 and train_episodes >= 0")
    if c.oracle_max_states < 1:
        raise ConfigError("compare.oracle_max_states must be >= 1")
