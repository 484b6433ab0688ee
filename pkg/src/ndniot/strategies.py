"""Forwarding and caching decisions: VIF, RONR, CFA and ONPC.

The node pipeline calls into this module at three points (Interest
forwarding, route installation on Data, Data emission) plus the hook for
Data overheard on the shared radio.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from . import tables
from .tables import LOCAL, NodeState, Priority
from .wire import Packet, parent_prefix


class Routing(str, enum.Enum):
    VIF = "vif"
    RONR = "ronr"


class Emission(enum.Enum):
    BROADCAST = "broadcast"
    UNICAST_EACH = "unicast_each"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyConfig:
    routing: Routing = Routing.VIF
    cfa: bool = False
    onpc: bool = False
    cache_capacity_chunks: int = 0
    temp_fib_lifetime_ms: int = tables.DEFAULT_TEMP_FIB_MS

    def __post_init__(self):
        object.__setattr__(self, "routing", Routing(self.routing))
        if self.cache_capacity_chunks < 0:
            raise ConfigError("cache capacity must be >= 0")
        if self.onpc and self.cache_capacity_chunks == 0:
            raise ConfigError("onpc needs a non-zero cache")
        if self.temp_fib_lifetime_ms <= 0:
            raise ConfigError("temporary FIB lifetime must be positive")

    @classmethod
    def from_keys(cls, keys: Mapping[str, object]) -> "StrategyConfig":
        """Build from scenario keys: routing, cfa, onpc, cache_chunks, temp_fib_ms."""
        known = {"routing", "cfa", "onpc", "cache_chunks", "temp_fib_ms"}
        unknown = set(keys) - known
        if unknown:
            raise ConfigError(f"unknown strategy keys: {sorted(unknown)}")
        try:
            return cls(
                routing=Routing(str(keys.get("routing", "vif")).lower()),
                cfa=_on_off(keys.get("cfa", False)),
                onpc=_on_off(keys.get("onpc", False)),
                cache_capacity_chunks=int(keys.get("cache_chunks", 0)),
                temp_fib_lifetime_ms=int(keys.get("temp_fib_ms", tables.DEFAULT_TEMP_FIB_MS)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @property
    def label(self) -> str:
        return self.routing.value


def _on_off(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ("on", "true", "1", "yes"):
        return True
    if text in ("off", "false", "0", "no"):
        return False
    raise ConfigError(f"expected on/off, got {value!r}")


@dataclass(frozen=True)
class Decision:
    face: Optional[str] = None

    @property
    def flood(self) -> bool:
        return self.face is None


FLOOD = Decision()


def decide_interest_forwarding(config: StrategyConfig, state: NodeState, interest: Packet,
                               now: float) -> Decision:
    if config.routing is Routing.VIF:
        return FLOOD
    face = tables.fib_lookup(state, interest.name, now)
    if face is None:
        return FLOOD
    pit = state.pit.get(interest.name)
    if pit is not None and face in pit.incoming:
        # route points back at a requester; unicasting would loop
        return FLOOD
    return Decision(face)


def on_data_install_route(config: StrategyConfig, state: NodeState, data: Packet, face: str,
                          now: float) -> None:
    if config.routing is not Routing.RONR or face == LOCAL or len(data.name) < 2:
        return
    tables.fib_insert(state, parent_prefix(data.name), face,
                      now + config.temp_fib_lifetime_ms, temporary=True)


def select_data_emission(config: StrategyConfig, pit_incoming: Iterable[str]) -> Emission:
    neighbors = [f for f in pit_incoming if f != LOCAL]
    if config.cfa and len(neighbors) >= 2:
        return Emission.BROADCAST
    return Emission.UNICAST_EACH


def on_overheard_data(config: StrategyConfig, state: NodeState, data: Packet, now: float) -> bool:
    """Returns True when the chunk was cached."""
    if not config.onpc:
        return False
    return tables.cs_insert(state, data, Priority.UNSOLICITED, now)
