"""Scenario configuration files (JSON) and CSV output helpers.

A scenario file is a JSON object; every key is optional and unknown keys
are rejected.  See ``README.md`` for the full key list.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .quantizer import QuantizerSpec
from .sim import Coupling, SimConfig
from .synthesis import synthesize
from .topology import build_standard, from_arrays
from .vehicle import FormationSpec, HeadProfile, VehicleParams, linear_model

__all__ = ["ScenarioConfig", "load_config", "parse_config", "config_hash", "write_csv"]


def _take(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where} must be an object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {unknown}")
    return d


@dataclass(frozen=True)
class PrivacySettings:
    zeta: float = 0.5
    pairs: int = 10000
    target: int = 1


@dataclass(frozen=True)
class TradeoffSettings:
    weights: tuple = ((1.0, 2.0), (1.0, 16.0), (4.0, 1.0))
    f2_min: float = 0.1
    f2_max: float = 10.0
    f2_points: int = 200


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    topology: dict = field(default_factory=lambda: {"kind": "BDL", "n": 10})
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    gamma: float = 1.0
    quantizer: QuantizerSpec = field(default_factory=lambda: QuantizerSpec("deterministic", 1.0))
    head: HeadProfile = field(default_factory=HeadProfile)
    gap: float = 20.0
    initial_states: tuple | None = None
    duration: float = 60.0
    h_int: float = 1e-3
    h_comm: float = 1e-2
    record_every: int = 1
    coupling: str = "sampled"
    seed: int = 0
    replicas: int = 200
    output_dir: str = "out"
    sweep_steps: tuple = (0.25, 0.5, 0.75, 1.0)
    privacy: PrivacySettings = field(default_factory=PrivacySettings)
    tradeoff: TradeoffSettings = field(default_factory=TradeoffSettings)

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.replicas < 1:
            raise ConfigurationError("replicas must be >= 1")
        if not self.sweep_steps or any(s <= 0 for s in self.sweep_steps):
            raise ConfigurationError("sweep_steps must be positive")
        try:
            Coupling(self.coupling)
        except ValueError:
            raise ConfigurationError(f"unknown coupling {self.coupling!r}") from None
        # fail early on bad topologies and formations
        self.build_topology()
        FormationSpec(self.gap)

    def build_topology(self):
        t = self.topology
        if "kind" in t:
            _take(t, ("kind", "n"), "topology")
            try:
                return build_standard(t["kind"], t.get("n", 10))
            except ValueError as exc:
                raise ConfigurationError(str(exc)) from None
        _take(t, ("adjacency", "pinning"), "topology")
        if "adjacency" not in t or "pinning" not in t:
            raise ConfigurationError("topology needs either kind/n or adjacency/pinning")
        return from_arrays(t["adjacency"], t["pinning"])

    def build_sim(self):
        """Synthesize gains and assemble the simulation config."""
        topo = self.build_topology()
        gains = synthesize(linear_model(self.vehicle), topo, self.gamma)
        return SimConfig(
            topology=topo,
            gains=gains,
            quantizer=self.quantizer,
            head=self.head,
            formation=FormationSpec(self.gap),
            initial_states=None if self.initial_states is None else np.array(self.initial_states),
            duration=self.duration,
            h_int=self.h_int,
            h_comm=self.h_comm,
            record_every=self.record_every,
            coupling=self.coupling,
            seed=self.seed,
        )

    def to_dict(self):
        return {
            "topology": dict(self.topology),
            "vehicle": {f.name: getattr(self.vehicle, f.name) for f in fields(VehicleParams)},
            "gamma": self.gamma,
            "quantizer": self.quantizer.to_dict(),
            "head": self.head.to_dict(),
            "gap": self.gap,
            "initial_states": None if self.initial_states is None else [list(r) for r in self.initial_states],
            "duration": self.duration,
            "h_int": self.h_int,
            "h_comm": self.h_comm,
            "record_every": self.record_every,
            "coupling": self.coupling,
            "seed": self.seed,
            "replicas": self.replicas,
            "output_dir": self.output_dir,
            "sweep_steps": list(self.sweep_steps),
            "privacy": {f.name: getattr(self.privacy, f.name) for f in fields(PrivacySettings)},
            "tradeoff": {
                "weights": [list(w) for w in self.tradeoff.weights],
                "f2_min": self.tradeoff.f2_min,
                "f2_max": self.tradeoff.f2_max,
                "f2_points": self.tradeoff.f2_points,
            },
        }

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return parse_config(d)


_TOP_KEYS = tuple(f.name for f in fields(ScenarioConfig))


def _float(x, name):
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {x!r}") from None


def parse_config(data):
    """Build a :class:`ScenarioConfig` from a decoded JSON object."""
    _take(data, _TOP_KEYS, "config")
    kw = {}
    if "topology" in data:
        kw["topology"] = dict(_take(data["topology"], ("kind", "n", "adjacency", "pinning"), "topology"))
    if "vehicle" in data:
        v = _take(data["vehicle"], [f.name for f in fields(VehicleParams)], "vehicle")
        kw["vehicle"] = VehicleParams(**{k: _float(x, k) for k, x in v.items()})
    if "quantizer" in data:
        q = _take(data["quantizer"], ("kind", "step"), "quantizer")
        kw["quantizer"] = QuantizerSpec(q.get("kind", "none"), _float(q.get("step", 1.0), "step"))
    if "head" in data:
        h = _take(data["head"], ("v0", "p0", "breakpoints", "accelerations"), "head")
        kw["head"] = HeadProfile(**{k: tuple(x) if isinstance(x, list) else _float(x, k) for k, x in h.items()})
    for key in ("gamma", "gap", "duration", "h_int", "h_comm"):
        if key in data:
            kw[key] = _float(data[key], key)
    for key in ("record_every", "seed", "replicas"):
        if key in data:
            kw[key] = int(data[key])
    for key in ("coupling", "output_dir"):
        if key in data:
            kw[key] = str(data[key])
    if data.get("initial_states") is not None:
        kw["initial_states"] = tuple(tuple(_float(x, "initial_states") for x in row) for row in data["initial_states"])
    if "sweep_steps" in data:
        kw["sweep_steps"] = tuple(_float(x, "sweep_steps") for x in data["sweep_steps"])
    if "privacy" in data:
        p = _take(data["privacy"], [f.name for f in fields(PrivacySettings)], "privacy")
        kw["privacy"] = PrivacySettings(
            zeta=_float(p.get("zeta", 0.5), "zeta"), pairs=int(p.get("pairs", 10000)), target=int(p.get("target", 1))
        )
    if "tradeoff" in data:
        t = _take(data["tradeoff"], [f.name for f in fields(TradeoffSettings)], "tradeoff")
        base = TradeoffSettings()
        kw["tradeoff"] = TradeoffSettings(
            weights=tuple(tuple(_float(x, "weights") for x in w) for w in t.get("weights", base.weights)),
            f2_min=_float(t.get("f2_min", base.f2_min), "f2_min"),
            f2_max=_float(t.get("f2_max", base.f2_max), "f2_max"),
            f2_points=int(t.get("f2_points", base.f2_points)),
        )
    return ScenarioConfig(**kw)


def load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data)


def config_hash(cfg):
    """Short digest of the scenario; the output directory is not part of it."""
    d = cfg.to_dict()
    d.pop("output_dir")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows, cfg):
    """Write rows with a leading ``# config_hash=... seed=...`` comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# qplatoon config_hash={config_hash(cfg)} seed={cfg.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path
