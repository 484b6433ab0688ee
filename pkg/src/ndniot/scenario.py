"""Scenario description, bundled sample topologies and preset loading."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .radio import (
    MAX_SIM_TIME_MS, RadioTopology, TopologyError, UnknownNode, gen_grid, gen_line, grid_label,
    load_topology,
)
from .strategies import ConfigError, StrategyConfig
from .wire import WireError, parse_name

DEFAULT_BASE_NAME = "/riot/text"
DEFAULT_STAGGER_MS = 10_000
DEFAULT_BEACON_INTERVAL_MS = 1000
MIN_PRODUCER_HOPS = 2


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    file: str
    producer: str
    consumers: tuple[str, ...]


# Hand-built approximations of 10- and 20-node testbed snapshots. The real
# per-direction link statistics are only partially known.
SAMPLES = {
    "sample10": Sample("sample10.topo", "t9-155", ("t9-k38",)),
    "sample20": Sample("sample20.topo", "t9-k36a", ("t9-149", "t9-148", "t9-150")),
}


def sample_text(name: str) -> str:
    try:
        sample = SAMPLES[name]
    except KeyError:
        raise ScenarioError(f"unknown sample topology {name!r}") from None
    return resources.files("ndniot").joinpath("data").joinpath(sample.file).read_text()


def resolve_topology(source: str) -> RadioTopology:
    """``sample10`` | ``sample20`` | ``line:N[:p]`` | ``grid:RxC[:p]`` | a file path."""
    try:
        if source in SAMPLES:
            return load_topology(sample_text(source))
        kind, _, rest = source.partition(":")
        if kind == "line" and rest:
            n, _, p = rest.partition(":")
            return gen_line(int(n), float(p) if p else 1.0)
        if kind == "grid" and rest:
            dims, _, p = rest.partition(":")
            r, _, c = dims.partition("x")
            return gen_grid(int(r), int(c), float(p) if p else 1.0)
        path = Path(source[5:] if source.startswith("file:") else source)
        return load_topology(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read topology {source!r}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, TopologyError):
            raise
        raise ScenarioError(f"bad topology source {source!r}: {exc}") from exc


def default_endpoints(source: str, topology: RadioTopology) -> tuple[str, list[str]]:
    """Producer and consumer defaults for a topology source."""
    if source in SAMPLES:
        s = SAMPLES[source]
        return s.producer, list(s.consumers)
    if source.startswith("grid:"):
        dims = source.split(":")[1]
        r, c = (int(x) for x in dims.split("x"))
        return grid_label(r - 1, c - 1), [grid_label(0, 0)]
    nodes = topology.nodes
    return nodes[-1], [nodes[0]]


@dataclass(frozen=True)
class Scenario:
    name: str
    topology: str
    producer: str
    consumers: tuple[str, ...]
    k: int = 10
    stack: str = "ndn"
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    base_name: str = DEFAULT_BASE_NAME
    runs: int = 20
    seed: int = 1
    consumer_stagger_ms: int = DEFAULT_STAGGER_MS
    beacon_interval_ms: int = DEFAULT_BEACON_INTERVAL_MS
    root: Optional[str] = None
    max_time_ms: int = MAX_SIM_TIME_MS

    def __post_init__(self):
        object.__setattr__(self, "consumers", tuple(self.consumers))
        if self.stack not in ("ndn", "baseline"):
            raise ScenarioError(f"stack must be ndn or baseline, not {self.stack!r}")
        if self.k < 0:
            raise ScenarioError("k must be >= 0")
        if self.runs < 1:
            raise ScenarioError("runs must be >= 1")
        if not self.consumers:
            raise ScenarioError("at least one consumer is required")
        if self.producer in self.consumers:
            raise ScenarioError("the producer cannot also be a consumer")
        if len(set(self.consumers)) != len(self.consumers):
            raise ScenarioError("duplicate consumer")
        try:
            parse_name(self.base_name)
        except WireError as exc:
            raise ScenarioError(f"bad base name: {exc}") from exc

    @property
    def m(self) -> int:
        return len(self.consumers)

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.runs)]

    def check_nodes(self, topology: RadioTopology) -> None:
        known = set(topology.nodes)
        for n in (self.producer, *self.consumers, *([self.root] if self.root else [])):
            if n not in known:
                raise UnknownNode(n)

    def validate(self, topology: RadioTopology, min_hops: int = MIN_PRODUCER_HOPS) -> None:
        """Node existence plus the producer/consumer distance rule."""
        self.check_nodes(topology)
        for c in self.consumers:
            h = topology.hop_distance(c, self.producer)
            if h is None:
                raise ScenarioError(f"producer unreachable from {c}")
            if h < min_hops:
                raise ScenarioError(f"{c} is {h} hop(s) from the producer; need >= {min_hops}")

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


_STRATEGY_KEYS = ("routing", "cfa", "onpc", "cache_chunks", "temp_fib_ms")
_SCENARIO_KEYS = {
    "name", "topology", "stack", "producer", "consumers", "m", "k", "runs", "seed",
    "base_name", "consumer_stagger_ms", "beacon_interval_ms", "root", "max_time_ms",
    *_STRATEGY_KEYS,
}
# keys that may hold a list and expand into one scenario per value
_SWEEP_KEYS = ("k", "m", "cache_chunks", "routing", "stack")
_TAGS = {"cache_chunks": "cache", "routing": "", "stack": ""}


def scenario_from_dict(spec: dict) -> Scenario:
    unknown = set(spec) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        source = spec["topology"]
        name = spec.get("name", "run")
    except KeyError as exc:
        raise ScenarioError(f"missing key {exc}") from None
    producer = spec.get("producer")
    consumers = spec.get("consumers")
    if producer is None or consumers is None:
        topo = resolve_topology(source)
        d_prod, d_cons = default_endpoints(source, topo)
        producer = producer or d_prod
        consumers = consumers or d_cons
    if isinstance(consumers, str):
        consumers = [c for c in consumers.split(",") if c]
    if "m" in spec:
        m = int(spec["m"])
        if not 1 <= m <= len(consumers):
            raise ScenarioError(f"m={m} but only {len(consumers)} consumers listed")
        consumers = consumers[:m]
    try:
        strategy = StrategyConfig.from_keys({k: spec[k] for k in _STRATEGY_KEYS if k in spec})
        return Scenario(
            name=name, topology=source, producer=producer, consumers=tuple(consumers),
            k=int(spec.get("k", 10)), stack=spec.get("stack", "ndn"), strategy=strategy,
            base_name=spec.get("base_name", DEFAULT_BASE_NAME), runs=int(spec.get("runs", 20)),
            seed=int(spec.get("seed", 1)),
            consumer_stagger_ms=int(spec.get("consumer_stagger_ms", DEFAULT_STAGGER_MS)),
            beacon_interval_ms=int(spec.get("beacon_interval_ms", DEFAULT_BEACON_INTERVAL_MS)),
            root=spec.get("root"), max_time_ms=int(spec.get("max_time_ms", MAX_SIM_TIME_MS)),
        )
    except ConfigError as exc:
        raise ScenarioError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario {name!r}: {exc}") from exc


def expand_preset(preset: dict) -> list[Scenario]:
    """One scenario per combination of list-valued sweep keys."""
    sweep = {k: preset[k] for k in _SWEEP_KEYS if isinstance(preset.get(k), list)}
    fixed = {k: v for k, v in preset.items() if k not in sweep}
    out = []
    keys = list(sweep)
    base = preset.get("name", "run")
    for combo in itertools.product(*(sweep[k] for k in keys)):
        spec = dict(fixed, **dict(zip(keys, combo)))
        if keys:
            tags = [f"{_TAGS.get(k, k)}{v}" for k, v in zip(keys, combo)]
            spec["name"] = "-".join([base, *tags])
        out.append(scenario_from_dict(spec))
    return out


def load_presets(path: Optional[str | Path] = None) -> dict[str, list[Scenario]]:
    """Parse a preset file (bundled ``presets.json`` by default)."""
    try:
        if path is None:
            text = resources.files("ndniot").joinpath("data").joinpath("presets.json").read_text()
        else:
            text = Path(path).read_text()
        doc = json.loads(text)
        presets = doc["presets"]
        if not isinstance(presets, list):
            raise ScenarioError("'presets' must be a list")
        out: dict[str, list[Scenario]] = {}
        for p in presets:
            if not isinstance(p, dict) or "name" not in p:
                raise ScenarioError("every preset needs a name")
            out[p["name"]] = expand_preset(p)
        return out
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ScenarioError(f"cannot load presets: {exc}") from exc
