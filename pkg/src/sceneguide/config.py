"""Strict YAML run configuration.

One file drives every CLI command.  Sections map onto the library's
config dataclasses; unknown keys and out-of-range values raise
ConfigError before any work starts.  The top-level ``seed`` is the
default for every section that does not set its own.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .denoiser import TrainConfig
from .errors import ConfigError
from .guidance import GuidanceConfig
from .synthdata import GenSpec

_SECTIONS = ("data", "train", "schedule", "sampler", "guidance", "metrics")
_TOP_KEYS = set(_SECTIONS) | {"seed", "out_dir"}


@dataclass(frozen=True)
class ScheduleConfig:
    T: int = 1000
    kind: str = "squared_cosine"
    s: float = 0.008

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be at least 2")


@dataclass(frozen=True)
class SamplerOptions:
    seed: int = 0
    room_half_extent: float = 4.0
    use_guidance: bool = True
    clip_x0: float | None = 2.0

    def __post_init__(self):
        if self.room_half_extent <= 0:
            raise ValueError("room_half_extent must be positive")
        if self.clip_x0 is not None and self.clip_x0 <= 0:
            raise ValueError("clip_x0 must be positive or null")


@dataclass(frozen=True)
class MetricOptions:
    runs: int = 10
    samples: int = 2000
    jitter: float = 0.002
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1 or self.samples < 1:
            raise ValueError("runs and samples must be positive")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out_dir: str = "out"
    data: GenSpec = field(default_factory=GenSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    sampler: SamplerOptions = field(default_factory=SamplerOptions)
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    metrics: MetricOptions = field(default_factory=MetricOptions)


_SECTION_TYPES = {
    "data": GenSpec,
    "train": TrainConfig,
    "schedule": ScheduleConfig,
    "sampler": SamplerOptions,
    "guidance": GuidanceConfig,
    "metrics": MetricOptions,
}

# Fields that default to the top-level seed when a section omits them.
_SEEDED = {"data", "train", "sampler", "metrics"}


def _build_section(name: str, cls, raw: dict, global_seed: int):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key '{name}.{sorted(unknown)[0]}'")
    kwargs = {}
    for key, value in raw.items():
        f = known[key]
        # YAML has no tuple type; ranges arrive as 2-element lists.
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    if name in _SEEDED and "seed" not in kwargs:
        kwargs["seed"] = global_seed
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in section '{name}': {exc}") from exc


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}'")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("out_dir must be a string")
    sections = {}
    for name in _SECTIONS:
        sub = raw.get(name, {})
        if sub is None:
            sub = {}
        if not isinstance(sub, dict):
            raise ConfigError(f"section '{name}' must be a mapping")
        sections[name] = _build_section(name, _SECTION_TYPES[name], sub, seed)
    return RunConfig(seed=seed, out_dir=out_dir, **sections)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    return parse_config(raw)


def _listify(value):
    if isinstance(value, tuple):
        return [_listify(v) for v in value]
    if isinstance(value, dict):
        return {k: _listify(v) for k, v in value.items()}
    return value


def default_config_yaml() -> str:
    """A starting-point config with every key at its default."""
    cfg = RunConfig()
    doc = {
        "seed": cfg.seed,
        "out_dir": cfg.out_dir,
        "data": dataclasses.asdict(cfg.data),
        "train": dataclasses.asdict(cfg.train),
        "schedule": dataclasses.asdict(cfg.schedule),
        "sampler": dataclasses.asdict(cfg.sampler),
        "guidance": dataclasses.asdict(cfg.guidance),
        "metrics": dataclasses.asdict(cfg.metrics),
    }
    return yaml.safe_dump(_listify(doc), sort_keys=True)
