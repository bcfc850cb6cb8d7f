"""Line-oriented ``key=value`` experiment configuration.

Example::

    # utility sweep
    kind = utility
    m = 1024
    k = 4
    dataset_size = 100
    epsilon = 0.5, 1, 2, 4
    delta = 0.05
    alpha = 0.5, 0.9
    trials = 100
    query_count = 100000
    seed = 7
    output = utility.csv
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError

KINDS = ("fpr", "utility", "wdist", "audit", "calibrate")

_INT_LISTS = {"m", "k", "dataset_size"}
_FLOAT_LISTS = {"epsilon", "epsilon0", "delta", "alpha"}
_INTS = {"trials", "query_count", "seed", "universe"}
_ALIASES = {"A": "dataset_size", "rng_seed": "seed", "out": "output", "queries": "query_count"}


class ConfigError(DomainError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    m: list[int] = field(default_factory=lambda: [1024])
    k: list[int] = field(default_factory=lambda: [4])
    dataset_size: list[int] = field(default_factory=lambda: [100])
    epsilon: list[float] = field(default_factory=lambda: [1.0])
    epsilon0: list[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    delta: list[float] = field(default_factory=lambda: [0.05])
    alpha: list[float] = field(default_factory=lambda: [0.9])
    trials: int = 1000
    query_count: int = 100_000
    seed: int = 0
    universe: int = 1 << 32
    output: Path | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {', '.join(KINDS)}; got {self.kind!r}")
        for name in ("m", "k", "dataset_size"):
            if not getattr(self, name):
                raise ConfigError(f"{name} needs at least one value")
        if any(v < 2 for v in self.m):
            raise ConfigError("m values must be >= 2")
        if any(not 1 <= v <= 64 for v in self.k):
            raise ConfigError("k values must lie in [1, 64]")
        min_size = 0 if self.kind == "fpr" else 1
        if any(v < min_size for v in self.dataset_size):
            raise ConfigError(f"dataset_size values must be >= {min_size}")
        if any(not 0 < v < 1 for v in self.delta):
            raise ConfigError("delta values must lie in (0, 1)")
        if any(not 0 <= v <= 1 for v in self.alpha):
            raise ConfigError("alpha values must lie in [0, 1]")
        if any(v <= 0 for v in self.epsilon):
            raise ConfigError("epsilon values must be positive")
        if any(v < 0 for v in self.epsilon0):
            raise ConfigError("epsilon0 values must be >= 0")
        if self.trials < 1 or self.query_count < 1:
            raise ConfigError("trials and query_count must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


def _parse_value(key: str, raw: str, lineno: int):
    try:
        if key in _INT_LISTS:
            return [int(v) for v in raw.split(",") if v.strip()]
        if key in _FLOAT_LISTS:
            return [float(v) for v in raw.split(",") if v.strip()]
        if key in _INTS:
            return int(raw)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r}") from exc
    if key == "output":
        return Path(raw)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in ExperimentConfig.__dataclass_fields__:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    if "kind" not in values:
        raise ConfigError("config is missing the 'kind' key")
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
