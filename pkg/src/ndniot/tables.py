"""Per-node NDN state: FIB, PIT, Content Store, nonce table, consumer transfers."""

from __future__ import annotations

import enum
import math
import random
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

from .wire import Name, Packet, is_prefix

INTEREST_TIMEOUT_MS = 400
NONCE_TIMEOUT_MS = 900
PIT_LIFETIME_MS = NONCE_TIMEOUT_MS
MAX_TRIES = 5
DEFAULT_CACHE_CHUNKS = 20
DEFAULT_TEMP_FIB_MS = 5000

# Face id used for the node's own application (consumer or producer).
LOCAL = "<local>"


class Priority(enum.IntEnum):
    UNSOLICITED = 0
    SOLICITED = 1


class TransferStatus(enum.Enum):
    ACTIVE = "active"
    DONE = "done"
    FAILED = "failed"


@dataclass
class FibEntry:
    prefix: Name
    face: str
    expires_at: float
    temporary: bool = True
    installed_seq: int = 0


@dataclass
class PitEntry:
    name: Name
    incoming: set[str]
    expires_at: float
    nonces_seen: dict[int, float] = field(default_factory=dict)
    created_at: float = 0


@dataclass
class CsEntry:
    data: Packet
    priority: Priority
    last_used: float


@dataclass
class TransferState:
    base_name: Name
    total_chunks: int
    started_at: float
    next_chunk: int = 0
    attempts_for_current: int = 0
    retry_deadline: float = math.inf
    chunk_started_at: float = 0
    latencies: list[float] = field(default_factory=list)
    attempts_per_chunk: list[int] = field(default_factory=list)
    status: TransferStatus = TransferStatus.ACTIVE
    finished_at: Optional[float] = None
    # (prefix, face) of the FIB entry used by the outstanding attempt, if it was unicast
    unicast_via: Optional[tuple[Name, str]] = None

    @property
    def active(self) -> bool:
        return self.status is TransferStatus.ACTIVE


class TransferAlreadyActive(RuntimeError):
    pass


@dataclass
class NodeState:
    id: str
    cache_capacity: int = 0
    producer_of: Optional[Name] = None
    produced_chunks: int = 0
    fib: dict[tuple[Name, str], FibEntry] = field(default_factory=dict)
    pit: dict[Name, PitEntry] = field(default_factory=dict)
    cs: "OrderedDict[Name, CsEntry]" = field(default_factory=OrderedDict)
    dedup: dict[tuple[Name, int], float] = field(default_factory=dict)
    transfers: dict[Name, TransferState] = field(default_factory=dict)
    rng: random.Random = field(default_factory=random.Random, repr=False)
    cs_refused: int = 0
    _fib_seq: int = 0

    @property
    def is_consumer(self) -> bool:
        return bool(self.transfers)

    def new_nonce(self) -> int:
        return self.rng.getrandbits(32)

    def next_deadline(self) -> float:
        return min((t.retry_deadline for t in self.transfers.values() if t.active),
                   default=math.inf)


def cs_lookup(state: NodeState, name: Name, now: Optional[float] = None) -> Optional[Packet]:
    entry = state.cs.get(name)
    if entry is None:
        return None
    state.cs.move_to_end(name)
    if now is not None:
        entry.last_used = now
    return entry.data


def _lru_of(state: NodeState, priority: Priority) -> Optional[Name]:
    # OrderedDict order is least- to most-recently used
    for name, entry in state.cs.items():
        if entry.priority == priority:
            return name
    return None


def cs_insert(state: NodeState, data: Packet, priority: Priority, now: float) -> bool:
    """Insert a Data packet; returns False when the store refuses it.

    Solicited content displaces unsolicited content first, then the least
    recently used solicited entry. Unsolicited content only displaces other
    unsolicited content and is refused when the store is full of solicited
    entries.
    """
    cap = state.cache_capacity
    if cap <= 0:
        return False
    existing = state.cs.get(data.name)
    if existing is not None:
        existing.priority = max(existing.priority, priority)
        existing.last_used = now
        state.cs.move_to_end(data.name)
        return True
    if len(state.cs) >= cap:
        victim = _lru_of(state, Priority.UNSOLICITED)
        if victim is None and priority == Priority.SOLICITED:
            victim = _lru_of(state, Priority.SOLICITED)
        if victim is None:
            state.cs_refused += 1
            return False
        del state.cs[victim]
    state.cs[data.name] = CsEntry(data, priority, now)
    return True


def fib_insert(state: NodeState, prefix: Name, face: str, expires_at: float,
               temporary: bool = True) -> FibEntry:
    state._fib_seq += 1
    entry = state.fib.get((prefix, face))
    if entry is None:
        entry = FibEntry(prefix, face, expires_at, temporary, state._fib_seq)
        state.fib[(prefix, face)] = entry
    else:
        entry.expires_at = expires_at
        entry.temporary = temporary
        entry.installed_seq = state._fib_seq
    return entry


def fib_remove(state: NodeState, prefix: Name, face: str) -> bool:
    return state.fib.pop((prefix, face), None) is not None


def fib_match(state: NodeState, name: Name, now: float) -> Optional[FibEntry]:
    best = None
    for entry in state.fib.values():
        if entry.expires_at <= now or not is_prefix(entry.prefix, name):
            continue
        key = (len(entry.prefix.components), entry.installed_seq)
        if best is None or key > (len(best.prefix.components), best.installed_seq):
            best = entry
    return best


def fib_lookup(state: NodeState, name: Name, now: float) -> Optional[str]:
    """Longest-prefix match over unexpired entries, newest install wins ties."""
    entry = fib_match(state, name, now)
    return entry.face if entry else None


def pit_get(state: NodeState, name: Name, now: float) -> Optional[PitEntry]:
    entry = state.pit.get(name)
    if entry is not None and entry.expires_at <= now:
        del state.pit[name]
        return None
    return entry


def seen_nonce(state: NodeState, name: Name, nonce: int, now: float) -> bool:
    expiry = state.dedup.get((name, nonce))
    return expiry is not None and expiry > now


def remember_nonce(state: NodeState, name: Name, nonce: int, now: float) -> None:
    state.dedup[(name, nonce)] = now + NONCE_TIMEOUT_MS


def expire(state: NodeState, now: float) -> None:
    """Drop expired nonce, PIT and FIB state."""
    state.dedup = {k: t for k, t in state.dedup.items() if t > now}
    for name in [n for n, e in state.pit.items() if e.expires_at <= now]:
        del state.pit[name]
    for key in [k for k, e in state.fib.items() if e.expires_at <= now]:
        del state.fib[key]
