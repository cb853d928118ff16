"""Experiment configuration: YAML in, validated dataclass out.

Schema (keys not listed for a kind are ignored)::

    kind: oracle-suite | figure3 | critical-scan | diagnostics-scan | symmetry-table
    lattice: {N: 20, boundary: periodic}
    p_grid: [0.05, 0.1, ...]        # bit-flip rates p_x
    p_z: 0.0                        # phase-flip rate
    replica: 2                      # n (negativities use 2n)
    seed: 1
    out: results
    schedule: {thermalization: 20000, sweeps: 100000, points: 12, method: hybrid}
    loops: [[6, 6], [10, 10]]       # figure3 / diagnostics-scan
    sizes: [16, 24, 32]             # critical-scan
    family: plain | decoupled       # critical-scan
    partition: {N: 10, cuts: [3, 7]}  # diagnostics-scan negativity
    separations: [1, 2, 3]          # diagnostics-scan relative entropy
    mode: exact | mc                # diagnostics-scan
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

KINDS = ("oracle-suite", "figure3", "critical-scan", "diagnostics-scan", "symmetry-table")
MAX_MC_SIZE = 64


class ConfigError(ValueError):
    pass


@dataclass
class Schedule:
    thermalization: int = 20000
    sweeps: int = 100000
    points: int = 12
    method: str = "hybrid"


@dataclass
class ExperimentConfig:
    kind: str
    lattice: dict = field(default_factory=lambda: {"N": 4, "boundary": "periodic"})
    p_grid: list = field(default_factory=list)
    p_z: float = 0.0
    replica: int = 2
    seed: int = 0
    out: str = "results"
    schedule: Schedule = field(default_factory=Schedule)
    loops: list = field(default_factory=lambda: [[6, 6], [10, 10]])
    sizes: list = field(default_factory=lambda: [16, 24, 32])
    family: str = "plain"
    partition: dict = field(default_factory=lambda: {"N": 10, "cuts": [3, 7]})
    separations: list = field(default_factory=lambda: [1, 2, 3])
    mode: str = "exact"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        d = dict(d)
        sched = d.pop("schedule", {}) or {}
        bad = set(sched) - set(Schedule.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown schedule keys: {sorted(bad)}")
        if "kind" not in d:
            raise ConfigError("missing 'kind'")
        cfg = cls(schedule=Schedule(**sched), **d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}")
        N = self.lattice.get("N")
        if not isinstance(N, int) or N < 2:
            raise ConfigError("lattice.N must be an integer >= 2")
        if N > MAX_MC_SIZE or any(s > MAX_MC_SIZE for s in self.sizes):
            raise ConfigError(f"lattice sizes above {MAX_MC_SIZE} are over budget")
        if self.lattice.get("boundary", "periodic") not in ("periodic", "open"):
            raise ConfigError("lattice.boundary must be 'periodic' or 'open'")
        if self.kind != "symmetry-table" and not self.p_grid:
            raise ConfigError("p_grid is empty")
        for p in list(self.p_grid) + [self.p_z]:
            if not isinstance(p, (int, float)) or not 0 <= p < 0.5:
                raise ConfigError(f"invalid error rate {p!r}")
        if self.replica < 2:
            raise ConfigError("replica index must be >= 2")
        if self.kind == "critical-scan" and len(set(self.sizes)) < 3:
            raise ConfigError("critical-scan needs at least three sizes")
        if self.family not in ("plain", "decoupled"):
            raise ConfigError("family must be 'plain' or 'decoupled'")
        if self.mode not in ("exact", "mc"):
            raise ConfigError("mode must be 'exact' or 'mc'")
        if self.schedule.method not in ("metropolis", "wolff", "hybrid"):
            raise ConfigError("schedule.method must be metropolis, wolff or hybrid")
        if self.schedule.sweeps < 32:
            raise ConfigError("schedule.sweeps must allow 32 blocks")
        for w, h in self.loops:
            if self.kind in ("figure3",) and (w >= N or h >= N):
                raise ConfigError(f"loop {w}x{h} does not fit in an {N}x{N} torus")


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    data = dict(data or {})
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    return ExperimentConfig.from_dict(data)
