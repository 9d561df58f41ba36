"""Experiment configuration: a flat `key = value` document with published defaults.

An empty document parses to the full default configuration (the published
hyper-parameter table: lr 1e-2, tau 1e-2, gamma 0.95, buffer 1e6, batch 1024,
delta_ally 1e-5, delta_enemy 1e-3, 25-step episodes). Unknown keys and
constraint violations are rejected with the offending key named.

Recognized keys (see README for the full schema):

  scenario, agents, predators, prey          -- world selection and sizes
  variant, opponent_variant                  -- trainer per team
  delta_ally, delta_enemy                    -- bias step sizes
  gamma, tau, actor_lr, critic_lr            -- learning constants
  batch_size, buffer_capacity                -- replay settings
  episodes, horizon, seed                    -- run length and seeding
  noise_scale, noise_floor                   -- exploration schedule
  hidden_units                               -- MLP widths, comma separated
  eval_every, eval_episodes                  -- evaluation cadence
  checkpoint_every, log_every, trace_episodes -- output cadence
  dt, damping, agent_radius, contact_stiffness, base_speed, base_accel -- physics
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .env import Physics
from .marl import BiasConfig, BiasVariant, TrainConfig
from .scenarios import SCENARIO_NAMES


class ConfigError(ValueError):
    """Raised for unknown keys, type errors, or constraint violations."""


@dataclass
class RunConfig:
    scenario: str = "cooperative_navigation"
    agents: int = 3
    predators: int = 5
    prey: int = 3
    variant: BiasVariant = BiasVariant.F2DDPG
    opponent_variant: BiasVariant = BiasVariant.MADDPG
    bias: BiasConfig = field(default_factory=BiasConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    hidden_units: tuple[int, ...] = (64, 64)
    buffer_capacity: int = 1_000_000
    eval_every: int = 1000
    eval_episodes: int = 100
    checkpoint_every: int = 1000
    log_every: int = 1
    trace_episodes: int = 0
    dt: float = 0.1
    damping: float = 0.25
    agent_radius: float = 0.05
    contact_stiffness: float = 100.0
    base_speed: float = 1.0
    base_accel: float = 3.0
    out_dir: Optional[str] = None  # CLI-level, never serialized

    def physics(self) -> Physics:
        return Physics(dt=self.dt, damping=self.damping,
                       agent_radius=self.agent_radius,
                       contact_stiffness=self.contact_stiffness,
                       base_speed=self.base_speed, base_accel=self.base_accel)


def _parse_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"key '{key}': expected an integer, got '{value}'") from None


def _parse_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"key '{key}': expected a number, got '{value}'") from None


def _parse_variant(key, value):
    try:
        return BiasVariant(value)
    except ValueError:
        names = ", ".join(v.value for v in BiasVariant)
        raise ConfigError(f"key '{key}': unknown variant '{value}' (one of {names})") from None


def _parse_scenario(key, value):
    if value not in SCENARIO_NAMES:
        raise ConfigError(f"key '{key}': unknown scenario '{value}' "
                          f"(one of {', '.join(SCENARIO_NAMES)})")
    return value


def _parse_hidden(key, value):
    try:
        dims = tuple(int(p) for p in value.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"key '{key}': expected comma-separated integers, got '{value}'") from None
    if not dims or any(d < 1 for d in dims):
        raise ConfigError(f"key '{key}': hidden units must be positive, got '{value}'")
    return dims


def _positive(key, v):
    if v <= 0:
        raise ConfigError(f"key '{key}': must be positive, got {v}")
    return v


def _nonnegative(key, v):
    if v < 0:
        raise ConfigError(f"key '{key}': must be nonnegative, got {v}")
    return v


def _unit_interval(key, v):
    if not 0.0 <= v <= 1.0:
        raise ConfigError(f"key '{key}': must be in [0, 1], got {v}")
    return v


def _half_open_unit(key, v):
    if not 0.0 < v <= 1.0:
        raise ConfigError(f"key '{key}': must be in (0, 1], got {v}")
    return v


# key -> (parser, validator); order here is the canonical serialization order.
_SCHEMA = {
    "scenario": (_parse_scenario, lambda k, v: v),
    "agents": (_parse_int, _positive),
    "predators": (_parse_int, _positive),
    "prey": (_parse_int, _positive),
    "variant": (_parse_variant, lambda k, v: v),
    "opponent_variant": (_parse_variant, lambda k, v: v),
    "delta_ally": (_parse_float, _nonnegative),
    "delta_enemy": (_parse_float, _nonnegative),
    "gamma": (_parse_float, _unit_interval),
    "tau": (_parse_float, _half_open_unit),
    "actor_lr": (_parse_float, _positive),
    "critic_lr": (_parse_float, _positive),
    "batch_size": (_parse_int, _positive),
    "buffer_capacity": (_parse_int, _positive),
    "episodes": (_parse_int, _nonnegative),
    "horizon": (_parse_int, _positive),
    "seed": (_parse_int, _nonnegative),
    "noise_scale": (_parse_float, _nonnegative),
    "noise_floor": (_parse_float, _nonnegative),
    "hidden_units": (_parse_hidden, lambda k, v: v),
    "eval_every": (_parse_int, _nonnegative),
    "eval_episodes": (_parse_int, _positive),
    "checkpoint_every": (_parse_int, _nonnegative),
    "log_every": (_parse_int, _positive),
    "trace_episodes": (_parse_int, _nonnegative),
    "dt": (_parse_float, _positive),
    "damping": (_parse_float, _unit_interval),
    "agent_radius": (_parse_float, _positive),
    "contact_stiffness": (_parse_float, _nonnegative),
    "base_speed": (_parse_float, _positive),
    "base_accel": (_parse_float, _positive),
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a key=value document; empty text gives pure defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{line}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        parser, validator = _SCHEMA[key]
        values[key] = validator(key, parser(key, value))
    return _build(values)


def _build(values: dict) -> RunConfig:
    cfg = RunConfig()
    train_keys = {"gamma", "tau", "actor_lr", "critic_lr", "batch_size", "episodes",
                  "horizon", "noise_scale", "noise_floor", "seed"}
    train_kwargs = {}
    bias_kwargs = {}
    for key, value in values.items():
        if key in train_keys:
            train_kwargs[key] = value
        elif key == "delta_ally":
            bias_kwargs["delta_ally"] = value
        elif key == "delta_enemy":
            bias_kwargs["delta_enemy"] = value
        else:
            setattr(cfg, key, value)
    try:
        cfg.train = replace(TrainConfig(), **train_kwargs)
        cfg.bias = replace(BiasConfig(), **bias_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _format(value) -> str:
    if isinstance(value, BiasVariant):
        return value.value
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    flat = {
        "scenario": cfg.scenario, "agents": cfg.agents, "predators": cfg.predators,
        "prey": cfg.prey, "variant": cfg.variant,
        "opponent_variant": cfg.opponent_variant,
        "delta_ally": cfg.bias.delta_ally, "delta_enemy": cfg.bias.delta_enemy,
        "gamma": cfg.train.gamma, "tau": cfg.train.tau,
        "actor_lr": cfg.train.actor_lr, "critic_lr": cfg.train.critic_lr,
        "batch_size": cfg.train.batch_size, "buffer_capacity": cfg.buffer_capacity,
        "episodes": cfg.train.episodes, "horizon": cfg.train.horizon,
        "seed": cfg.train.seed, "noise_scale": cfg.train.noise_scale,
        "noise_floor": cfg.train.noise_floor, "hidden_units": cfg.hidden_units,
        "eval_every": cfg.eval_every, "eval_episodes": cfg.eval_episodes,
        "checkpoint_every": cfg.checkpoint_every, "log_every": cfg.log_every,
        "trace_episodes": cfg.trace_episodes, "dt": cfg.dt, "damping": cfg.damping,
        "agent_radius": cfg.agent_radius, "contact_stiffness": cfg.contact_stiffness,
        "base_speed": cfg.base_speed, "base_accel": cfg.base_accel,
    }
    return "".join(f"{key} = {_format(flat[key])}\n" for key in _SCHEMA)
