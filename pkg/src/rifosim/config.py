"""Experiment configuration: a single YAML file with defaults applied.

Every validation error names the offending field path (e.g.
"scheduler.guaranteed_fraction: must be in [0, 1)") so config mistakes are
reported before any simulation starts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .netsim import Topology, TransportConfig
from .policies import DEFAULT_RANK_QUANTUM, POLICY_KINDS
from .schedulers import (
    DEFAULT_AIFO_WINDOW,
    DEFAULT_QUEUE_CAPACITY,
    DEFAULT_SP_PIFO_QUEUES,
    DEFAULT_TRACKING_RANGE,
    SCHEDULER_KINDS,
)
from .workload import FlowSizeDistribution, load_cdf_file

OUTPUT_DIR_ENV = "RIFOSIM_OUTPUT_DIR"


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


def _require(condition: bool, fieldpath: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{fieldpath}: {message}")


def _check_keys(mapping: dict, allowed, fieldpath: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    _require(not unknown, fieldpath, f"unknown keys {unknown}; allowed: {sorted(allowed)}")


@dataclass(slots=True)
class SchedulerConfig:
    kind: str = "rifo"
    capacity: int = DEFAULT_QUEUE_CAPACITY
    tracking_range: int = DEFAULT_TRACKING_RANGE
    guaranteed_fraction: float = 0.1
    window_size: int = DEFAULT_AIFO_WINDOW
    num_queues: int = DEFAULT_SP_PIFO_QUEUES

    def validate(self) -> None:
        _require(self.kind in SCHEDULER_KINDS, "scheduler.kind",
                 f"must be one of {SCHEDULER_KINDS}, got {self.kind!r}")
        _require(self.capacity >= 1, "scheduler.capacity", "must be >= 1")
        _require(self.tracking_range >= 1, "scheduler.tracking_range", "must be >= 1")
        _require(0 <= self.guaranteed_fraction < 1, "scheduler.guaranteed_fraction",
                 f"must be in [0, 1), got {self.guaranteed_fraction}")
        _require(self.window_size >= 1, "scheduler.window_size", "must be >= 1")
        _require(self.num_queues >= 2, "scheduler.num_queues", "must be >= 2")

    def params(self) -> dict:
        return {
            "capacity": self.capacity,
            "tracking_range": self.tracking_range,
            "guaranteed_fraction": self.guaranteed_fraction,
            "window_size": self.window_size,
            "num_queues": self.num_queues,
        }


@dataclass(slots=True)
class PolicyConfig:
    kind: str = "srpt"
    rank_quantum: int = DEFAULT_RANK_QUANTUM

    def validate(self) -> None:
        _require(self.kind in POLICY_KINDS, "policy.kind",
                 f"must be one of {POLICY_KINDS}, got {self.kind!r}")
        _require(self.rank_quantum >= 1, "policy.rank_quantum", "must be >= 1")


@dataclass(slots=True)
class WorkloadConfig:
    distribution: object = "uniform"  # path str or inline mapping
    load: float = 0.7
    seed: int = 1
    horizon_ns: int = 100_000_000

    def validate(self) -> None:
        _require(0 < self.load <= 1, "workload.load",
                 f"must be in (0, 1], got {self.load}")
        _require(self.horizon_ns >= 1, "workload.horizon_ns", "must be >= 1")
        _require(self.seed >= 0, "workload.seed", "must be >= 0")


@dataclass(slots=True)
class SweepConfig:
    schedulers: list = field(default_factory=lambda: list(SCHEDULER_KINDS))
    loads: list = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    seeds: list = field(default_factory=lambda: [1, 2, 3])
    processes: int | None = None

    def validate(self) -> None:
        _require(bool(self.schedulers), "sweep.schedulers", "must not be empty")
        for kind in self.schedulers:
            _require(kind in SCHEDULER_KINDS, "sweep.schedulers",
                     f"must be one of {SCHEDULER_KINDS}, got {kind!r}")
        _require(bool(self.loads), "sweep.loads", "must not be empty")
        for load in self.loads:
            _require(0 < load <= 1, "sweep.loads", f"must be in (0, 1], got {load}")
        _require(bool(self.seeds), "sweep.seeds", "must not be empty")
        if self.processes is not None:
            _require(self.processes >= 1, "sweep.processes", "must be >= 1 or omitted")


_SECTION_KEYS = {
    "topology": ("preset", "leaf_count", "spine_count", "hosts_per_leaf",
                 "access_bps", "core_bps", "link_delay_ns"),
    "scheduler": ("kind", "capacity", "tracking_range", "guaranteed_fraction",
                  "window_size", "num_queues"),
    "policy": ("kind", "rank_quantum"),
    "workload": ("distribution", "load", "seed", "horizon_ns"),
    "transport": ("window_packets", "retransmit_delay_ns"),
    "sweep": ("schedulers", "loads", "seeds", "processes"),
    "sim": ("until_ns",),
}

_TOP_KEYS = tuple(_SECTION_KEYS) + ("output",)


@dataclass(slots=True)
class ExperimentConfig:
    topology_spec: dict = field(default_factory=lambda: {"preset": "desk"})
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    transport_spec: dict = field(default_factory=dict)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    until_ns: int | None = None
    output: str = "results.csv"
    base_dir: Path = field(default_factory=Path.cwd)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if raw is None:
            raw = {}
        _require(isinstance(raw, dict), "config", "top level must be a mapping")
        _check_keys(raw, _TOP_KEYS, "config")
        cfg = cls(base_dir=base_dir or Path.cwd())

        for section in ("scheduler", "policy", "workload", "sweep"):
            block = raw.get(section, {})
            _require(isinstance(block, dict), section, "must be a mapping")
            _check_keys(block, _SECTION_KEYS[section], section)
            target = getattr(cfg, section)
            for key, value in block.items():
                setattr(target, key, value)

        topo = raw.get("topology", {"preset": "desk"})
        if isinstance(topo, str):
            topo = {"preset": topo}
        _require(isinstance(topo, dict), "topology", "must be a mapping or preset name")
        _check_keys(topo, _SECTION_KEYS["topology"], "topology")
        cfg.topology_spec = topo

        transport = raw.get("transport", {})
        _require(isinstance(transport, dict), "transport", "must be a mapping")
        _check_keys(transport, _SECTION_KEYS["transport"], "transport")
        cfg.transport_spec = transport

        sim = raw.get("sim", {})
        _require(isinstance(sim, dict), "sim", "must be a mapping")
        _check_keys(sim, _SECTION_KEYS["sim"], "sim")
        cfg.until_ns = sim.get("until_ns")

        cfg.output = raw.get("output", "results.csv")
        cfg.validate()
        return cfg

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from None
        return cls.from_dict(raw, base_dir=path.parent)

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        self.scheduler.validate()
        self.policy.validate()
        self.workload.validate()
        self.sweep.validate()
        self.build_topology()
        self.distribution()
        if self.until_ns is not None:
            _require(self.until_ns >= 1, "sim.until_ns", "must be >= 1 or omitted")
        for key in ("window_packets", "retransmit_delay_ns"):
            value = self.transport_spec.get(key)
            if value is not None:
                _require(value >= 1, f"transport.{key}", "must be >= 1 or omitted")

    # -- builders ----------------------------------------------------------

    def build_topology(self) -> Topology:
        spec = dict(self.topology_spec)
        preset = spec.pop("preset", None)
        if preset is not None:
            _require(preset in ("desk", "full"), "topology.preset",
                     f"must be 'desk' or 'full', got {preset!r}")
            _require(not spec, "topology",
                     "preset cannot be combined with explicit fields")
            return Topology.desk_scale() if preset == "desk" else Topology.full_scale()
        try:
            return Topology(**spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"topology: {exc}") from None

    def build_transport(self, topology: Topology) -> TransportConfig:
        default = TransportConfig.from_topology(topology)
        try:
            return TransportConfig(
                window_packets=self.transport_spec.get("window_packets")
                or default.window_packets,
                retransmit_delay_ns=self.transport_spec.get("retransmit_delay_ns")
                or default.retransmit_delay_ns,
            )
        except ValueError as exc:
            raise ConfigError(f"transport: {exc}") from None

    def distribution(self) -> FlowSizeDistribution:
        spec = self.workload.distribution
        try:
            if isinstance(spec, str) and spec != "uniform":
                return load_cdf_file(self._resolve(spec))
            if spec == "uniform":
                return FlowSizeDistribution("uniform")
            if isinstance(spec, dict):
                spec = dict(spec)
                kind = spec.pop("kind", None)
                _require(kind in ("pareto", "uniform", "empirical"),
                         "workload.distribution.kind",
                         f"must be pareto, uniform or empirical, got {kind!r}")
                if kind == "empirical":
                    path = spec.pop("path", None)
                    _require(path is not None and not spec, "workload.distribution",
                             "empirical needs exactly the key 'path'")
                    return load_cdf_file(self._resolve(path))
                return FlowSizeDistribution(kind, **spec)
        except ConfigError:
            raise
        except (TypeError, ValueError, OSError) as exc:
            raise ConfigError(f"workload.distribution: {exc}") from None
        raise ConfigError(
            f"workload.distribution: expected a CDF file path or a mapping, got {spec!r}"
        )

    def workload_label(self) -> str:
        spec = self.workload.distribution
        if isinstance(spec, str) and spec != "uniform":
            return Path(spec).stem
        if isinstance(spec, dict):
            if spec.get("kind") == "empirical":
                return Path(spec["path"]).stem
            return spec.get("kind", "unknown")
        return "uniform"

    def output_path(self) -> Path:
        """Configured output, with its directory overridable by environment."""
        out = Path(self.output)
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if env_dir:
            return Path(env_dir) / out.name
        if not out.is_absolute():
            out = self.base_dir / out
        return out

    def _resolve(self, path_str: str) -> Path:
        path = Path(path_str)
        return path if path.is_absolute() else self.base_dir / path

    # -- round trip --------------------------------------------------------

    def effective_dict(self) -> dict:
        """Full config with defaults applied; reloading it runs identically."""
        return {
            "topology": dict(self.topology_spec),
            "scheduler": {
                "kind": self.scheduler.kind,
                **self.scheduler.params(),
            },
            "policy": {
                "kind": self.policy.kind,
                "rank_quantum": self.policy.rank_quantum,
            },
            "workload": {
                "distribution": self.workload.distribution,
                "load": self.workload.load,
                "seed": self.workload.seed,
                "horizon_ns": self.workload.horizon_ns,
            },
            "transport": dict(self.transport_spec),
            "sweep": {
                "schedulers": list(self.sweep.schedulers),
                "loads": list(self.sweep.loads),
                "seeds": list(self.sweep.seeds),
                "processes": self.sweep.processes,
            },
            "sim": {"until_ns": self.until_ns},
            "output": self.output,
        }
