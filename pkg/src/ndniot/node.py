"""The per-node NDN engine.

Every entry point takes the node's mutable state plus the current simulated
time and returns a list of actions for the radio simulator to carry out.
Nothing here touches the radio or the clock directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import strategies, tables
from .strategies import Emission, StrategyConfig
from .tables import (
    LOCAL, MAX_TRIES, INTEREST_TIMEOUT_MS, PIT_LIFETIME_MS, NONCE_TIMEOUT_MS,
    NodeState, PitEntry, Priority, TransferAlreadyActive, TransferState, TransferStatus,
)
from .wire import (
    Data, Interest, Name, Packet, WireError, chunk_index, chunk_name, decode, is_prefix,
    max_payload,
)

DEFAULT_PAYLOAD_LEN = 30


@dataclass(frozen=True)
class Broadcast:
    packet: Packet


@dataclass(frozen=True)
class Unicast:
    packet: Packet
    neighbor: str


@dataclass(frozen=True)
class TransferEvent:
    base_name: Name
    kind: str  # "chunk", "complete" or "failed"
    chunk: int
    latency_ms: Optional[float] = None
    attempts: int = 0


@dataclass(frozen=True)
class Deliver:
    event: TransferEvent


@dataclass(frozen=True)
class Drop:
    reason: str
    packet: Optional[Packet] = None


Action = Union[Broadcast, Unicast, Deliver, Drop]


def chunk_payload(name: Name, size: int = DEFAULT_PAYLOAD_LEN) -> bytes:
    size = min(size, max_payload(name))
    seed = str(name).encode("ascii") + b"|"
    return (seed * (size // len(seed) + 1))[:size]


def make_producer(state: NodeState, base_name: Name, k: int) -> None:
    state.producer_of = base_name
    state.produced_chunks = k


def _produced(state: NodeState, name: Name) -> Optional[Packet]:
    base = state.producer_of
    if base is None or len(name) != len(base) + 1 or not is_prefix(base, name):
        return None
    try:
        index = chunk_index(name.components[-1])
    except ValueError:
        return None
    if index >= state.produced_chunks:
        return None
    return Data(name, chunk_payload(name))


def _answer(state: NodeState, face: str, data: Packet, now: float,
            config: StrategyConfig) -> list[Action]:
    if face == LOCAL:
        return _consume(state, data, now, config)
    return [Unicast(data, face)]


def on_interest(state: NodeState, face: str, pkt: Packet, now: float,
                config: StrategyConfig) -> list[Action]:
    name = pkt.name
    if tables.seen_nonce(state, name, pkt.nonce, now):
        return [Drop("duplicate", pkt)]
    tables.remember_nonce(state, name, pkt.nonce, now)

    cached = tables.cs_lookup(state, name, now)
    if cached is not None:
        return _answer(state, face, cached, now, config)

    if state.producer_of is not None and is_prefix(state.producer_of, name):
        # the producer consumes the flood: answer or drop, never re-forward
        data = _produced(state, name)
        if data is None:
            return [Drop("no-such-chunk", pkt)]
        return _answer(state, face, data, now, config)

    pit = tables.pit_get(state, name, now)
    if pit is not None:
        pit.nonces_seen[pkt.nonce] = now + NONCE_TIMEOUT_MS
        if face not in pit.incoming:
            pit.incoming.add(face)
            return []
        # a fresh nonce from a face already waiting is a retransmission
        pit.expires_at = now + PIT_LIFETIME_MS
    else:
        state.pit[name] = PitEntry(name, {face}, now + PIT_LIFETIME_MS,
                                   {pkt.nonce: now + NONCE_TIMEOUT_MS}, now)

    decision = strategies.decide_interest_forwarding(config, state, pkt, now)
    out = pkt if face == LOCAL else pkt.forwarded()
    if decision.flood:
        return [Broadcast(out)]
    return [Unicast(out, decision.face)]


def on_data(state: NodeState, face: str, pkt: Packet, now: float, config: StrategyConfig,
            overheard: bool = False) -> list[Action]:
    name = pkt.name
    pit = tables.pit_get(state, name, now)
    if overheard:
        # unicast frames for other nodes never satisfy the PIT (link-layer filtering);
        # they only feed opportunistic caching
        if pit is None and strategies.on_overheard_data(config, state, pkt, now):
            return []
        return [Drop("overheard", pkt)]
    if pit is None:
        return [Drop("unsolicited", pkt)]

    tables.cs_insert(state, pkt, Priority.SOLICITED, now)
    strategies.on_data_install_route(config, state, pkt, face, now)
    del state.pit[name]

    actions: list[Action] = []
    neighbors = sorted(f for f in pit.incoming if f not in (LOCAL, face))
    if neighbors:
        out = pkt.forwarded()
        if strategies.select_data_emission(config, neighbors) is Emission.BROADCAST:
            actions.append(Broadcast(out))
        else:
            actions.extend(Unicast(out, n) for n in neighbors)
    if LOCAL in pit.incoming:
        actions.extend(_consume(state, pkt, now, config))
    return actions


def _consume(state: NodeState, data: Packet, now: float, config: StrategyConfig) -> list[Action]:
    for t in state.transfers.values():
        if t.active and chunk_name(t.base_name, t.next_chunk) == data.name:
            break
    else:
        return [Drop("stale", data)]

    latency = now - t.chunk_started_at
    t.latencies.append(latency)
    t.attempts_per_chunk.append(t.attempts_for_current)
    actions: list[Action] = [
        Deliver(TransferEvent(t.base_name, "chunk", t.next_chunk, latency, t.attempts_for_current))
    ]
    t.next_chunk += 1
    t.attempts_for_current = 0
    t.unicast_via = None
    if t.next_chunk >= t.total_chunks:
        t.status = TransferStatus.DONE
        t.finished_at = now
        t.retry_deadline = float("inf")
        actions.append(Deliver(TransferEvent(t.base_name, "complete", t.next_chunk)))
        return actions
    actions.extend(_send_current(state, t, now, config))
    return actions


def _send_current(state: NodeState, t: TransferState, now: float,
                  config: StrategyConfig) -> list[Action]:
    t.attempts_for_current += 1
    if t.attempts_for_current == 1:
        t.chunk_started_at = now
    t.retry_deadline = now + INTEREST_TIMEOUT_MS
    index = t.next_chunk
    name = chunk_name(t.base_name, index)
    route = tables.fib_match(state, name, now)
    t.unicast_via = None
    actions = on_interest(state, LOCAL, Interest(name, state.new_nonce()), now, config)
    if t.active and t.next_chunk == index and route is not None:
        # a local cache hit may already have moved the transfer on
        for a in actions:
            if isinstance(a, Unicast) and a.packet.name == name and a.neighbor == route.face:
                t.unicast_via = (route.prefix, route.face)
    return actions


def start_fetch(state: NodeState, base_name: Name, k: int, now: float,
                config: StrategyConfig) -> list[Action]:
    existing = state.transfers.get(base_name)
    if existing is not None and existing.active:
        raise TransferAlreadyActive(str(base_name))
    if k < 0:
        raise ValueError("chunk count must be >= 0")
    t = TransferState(base_name, k, started_at=now)
    state.transfers[base_name] = t
    if k == 0:
        t.status = TransferStatus.DONE
        t.finished_at = now
        return []
    return _send_current(state, t, now, config)


def tick(state: NodeState, now: float, config: StrategyConfig) -> list[Action]:
    tables.expire(state, now)
    actions: list[Action] = []
    for t in list(state.transfers.values()):
        if not t.active or t.retry_deadline > now:
            continue
        if t.attempts_for_current >= MAX_TRIES:
            t.status = TransferStatus.FAILED
            t.finished_at = now
            t.retry_deadline = float("inf")
            t.attempts_per_chunk.append(t.attempts_for_current)
            actions.append(Deliver(TransferEvent(t.base_name, "failed", t.next_chunk,
                                                 attempts=t.attempts_for_current)))
            continue
        if t.unicast_via is not None:
            # unicast attempt went unanswered: forget the route so the retry floods
            tables.fib_remove(state, *t.unicast_via)
        actions.extend(_send_current(state, t, now, config))
    return actions


def receive_frame(state: NodeState, sender: str, frame: bytes, addressed_to: Optional[str],
                  now: float, config: StrategyConfig) -> tuple[Optional[Packet], list[Action]]:
    """Decode a frame heard on the radio and run it through the pipeline.

    ``addressed_to`` is None for broadcasts. Returns the decoded packet (None
    when malformed) together with the resulting actions.
    """
    try:
        pkt = decode(frame)
    except WireError:
        return None, [Drop("malformed")]
    overheard = addressed_to is not None and addressed_to != state.id
    if pkt.is_interest:
        if overheard:
            return pkt, [Drop("overheard", pkt)]
        return pkt, on_interest(state, sender, pkt, now, config)
    return pkt, on_data(state, sender, pkt, now, config, overheard=overheard)
