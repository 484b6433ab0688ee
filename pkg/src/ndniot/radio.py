"""Shared lossy broadcast radio: topologies, transmissions, event loop, metrics.

Every transmission is heard independently by each neighbor of the sender
with that directed edge's delivery probability. Unicast frames are heard by
all neighbors too; receivers other than the destination see them as
overheard.
"""

from __future__ import annotations

import heapq
import itertools
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .wire import MTU, MtuExceeded

FRAME_DELAY_MS = 5
MAX_SIM_TIME_MS = 120_000


class TopologyError(ValueError):
    pass


class BadProbability(TopologyError):
    pass


class DuplicateEdge(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


class BadDimension(TopologyError):
    pass


class UnknownNode(ValueError):
    pass


@dataclass
class RadioTopology:
    nodes: list[str]
    edges: dict[tuple[str, str], float]

    def __post_init__(self):
        self.nodes = list(dict.fromkeys(self.nodes))
        known = set(self.nodes)
        for (src, dst), p in self.edges.items():
            if src == dst:
                raise SelfLoop(f"self edge on {src}")
            if not 0.0 <= p <= 1.0:
                raise BadProbability(f"{src}->{dst}: {p}")
            for n in (src, dst):
                if n not in known:
                    self.nodes.append(n)
                    known.add(n)
        self._neighbors: dict[str, list[str]] = defaultdict(list)
        for (src, dst), p in sorted(self.edges.items()):
            if p > 0:
                self._neighbors[src].append(dst)

    def neighbors(self, node: str) -> list[str]:
        """Nodes that can hear ``node`` (sorted by label)."""
        return self._neighbors.get(node, [])

    def probability(self, src: str, dst: str) -> float:
        return self.edges.get((src, dst), 0.0)

    @property
    def lossless(self) -> bool:
        return all(p in (0.0, 1.0) for p in self.edges.values())

    def max_degree(self) -> int:
        return max((len(self.neighbors(n)) for n in self.nodes), default=0)

    def hop_distance(self, src: str, dst: str) -> Optional[int]:
        """Directed BFS hop count over edges with non-zero delivery probability."""
        if src == dst:
            return 0
        seen = {src}
        frontier = [src]
        hops = 0
        while frontier:
            hops += 1
            nxt = []
            for u in frontier:
                for v in self.neighbors(u):
                    if v == dst:
                        return hops
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return None

    def to_text(self) -> str:
        lines = [f"{s} {d} {p:g}" for (s, d), p in sorted(self.edges.items())]
        return "\n".join(lines) + "\n"


def _parse_probability(token: str) -> float:
    try:
        if token.endswith("%"):
            p = float(token[:-1]) / 100.0
        else:
            p = float(token)
    except ValueError as exc:
        raise BadProbability(f"not a probability: {token!r}") from exc
    if not 0.0 <= p <= 1.0:
        raise BadProbability(f"probability out of range: {token!r}")
    return p


def load_topology(text: str) -> RadioTopology:
    """Parse ``src dst probability`` lines; ``#`` starts a comment.

    A line with a single token declares an isolated node. Probabilities are
    decimals in [0, 1] or percentages such as ``85%``.
    """
    nodes: list[str] = []
    edges: dict[tuple[str, str], float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            nodes.append(parts[0])
            continue
        if len(parts) != 3:
            raise TopologyError(f"line {lineno}: expected 'src dst probability'")
        src, dst, tok = parts
        if src == dst:
            raise SelfLoop(f"line {lineno}: self edge on {src}")
        if (src, dst) in edges:
            raise DuplicateEdge(f"line {lineno}: {src} -> {dst} listed twice")
        edges[(src, dst)] = _parse_probability(tok)
        nodes.extend((src, dst))
    return RadioTopology(nodes, edges)


def gen_line(n: int, p_good: float = 1.0, prefix: str = "n") -> RadioTopology:
    if n < 2:
        raise BadDimension("a line needs at least 2 nodes")
    if not 0.0 < p_good <= 1.0:
        raise BadProbability(f"p_good must be in (0, 1]: {p_good}")
    nodes = [f"{prefix}{i}" for i in range(n)]
    edges = {}
    for a, b in zip(nodes, nodes[1:]):
        edges[(a, b)] = p_good
        edges[(b, a)] = p_good
    return RadioTopology(nodes, edges)


def grid_label(r: int, c: int) -> str:
    return f"g{r}-{c}"


def gen_grid(rows: int, cols: int, p_good: float = 1.0) -> RadioTopology:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise BadDimension(f"grid {rows}x{cols} needs at least 2 nodes")
    if not 0.0 < p_good <= 1.0:
        raise BadProbability(f"p_good must be in (0, 1]: {p_good}")
    nodes = [grid_label(r, c) for r in range(rows) for c in range(cols)]
    edges = {}
    for r in range(rows):
        for c in range(cols):
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr < rows and cc < cols:
                    a, b = grid_label(r, c), grid_label(rr, cc)
                    edges[(a, b)] = p_good
                    edges[(b, a)] = p_good
    return RadioTopology(nodes, edges)


@dataclass(frozen=True)
class FrameArrival:
    time: float
    node: str
    sender: str
    frame: Any
    addressed_to: Optional[str]  # None for broadcast

    @property
    def overheard(self) -> bool:
        return self.addressed_to is not None and self.addressed_to != self.node


@dataclass
class TransferRecord:
    consumer: str
    base_name: str
    chunks: int
    started_at: float
    ok: bool = False
    timed_out: bool = False
    finished_at: Optional[float] = None
    chunk_latencies: list[float] = field(default_factory=list)
    attempts_per_chunk: list[int] = field(default_factory=list)

    @property
    def completion_ms(self) -> Optional[float]:
        if self.finished_at is None:
            return None
        return self.finished_at - self.started_at


@dataclass
class MetricsLedger:
    tx_broadcast: Counter = field(default_factory=Counter)
    tx_unicast: Counter = field(default_factory=Counter)
    rx: Counter = field(default_factory=Counter)
    drops: Counter = field(default_factory=Counter)
    drop_reasons: Counter = field(default_factory=Counter)
    transfers: list[TransferRecord] = field(default_factory=list)

    def count_tx(self, node: str, broadcast: bool) -> None:
        (self.tx_broadcast if broadcast else self.tx_unicast)[node] += 1

    def count_drop(self, node: str, reason: str) -> None:
        self.drops[node] += 1
        self.drop_reasons[reason] += 1

    @property
    def total_broadcast(self) -> int:
        return sum(self.tx_broadcast.values())

    @property
    def total_unicast(self) -> int:
        return sum(self.tx_unicast.values())

    @property
    def total_tx(self) -> int:
        return self.total_broadcast + self.total_unicast

    @property
    def total_rx(self) -> int:
        return sum(self.rx.values())

    @property
    def transfers_ok(self) -> int:
        return sum(1 for t in self.transfers if t.ok)

    @property
    def transfers_failed(self) -> int:
        return sum(1 for t in self.transfers if not t.ok)

    @property
    def chunk_latencies(self) -> list[float]:
        return [x for t in self.transfers for x in t.chunk_latencies]

    def mean_chunk_latency(self) -> Optional[float]:
        lat = self.chunk_latencies
        return sum(lat) / len(lat) if lat else None


def transmit(topology: RadioTopology, rng: random.Random, sender: str, frame,
             mode: Optional[str], now: float, ledger: Optional[MetricsLedger] = None,
             delay: float = FRAME_DELAY_MS) -> list[FrameArrival]:
    """Put one frame on the air.

    ``mode`` is None for a broadcast or the destination node id for a
    unicast. Each neighbor gets an independent Bernoulli draw.
    """
    if len(frame) > MTU:
        raise MtuExceeded(f"{len(frame)}-byte frame exceeds the {MTU}-byte MTU")
    if ledger is not None:
        ledger.count_tx(sender, broadcast=mode is None)
    arrivals = []
    for d in topology.neighbors(sender):
        if rng.random() < topology.probability(sender, d):
            arrivals.append(FrameArrival(now + delay, d, sender, frame, mode))
    return arrivals


@dataclass(frozen=True)
class TraceEvent:
    time: float
    node: str
    event: str
    kind: str = "-"
    name: str = "-"
    nonce: str = "-"
    src: str = "-"
    dst: str = "-"

    def line(self) -> str:
        t = int(self.time) if float(self.time).is_integer() else self.time
        return "\t".join(map(str, (t, self.node, self.event, self.kind, self.name,
                                   self.nonce, self.src, self.dst)))


TRACE_HEADER = "time_ms\tnode\tevent\tkind\tname\tnonce\tfrom\tto"


class EventLoop:
    """Min-heap of (time, sequence, event); ties resolve in insertion order."""

    def __init__(self, max_time: float = MAX_SIM_TIME_MS):
        self._heap: list[tuple[float, int, Any]] = []
        self._seq = itertools.count()
        self.now: float = 0
        self.max_time = max_time

    def schedule(self, time: float, event: Any) -> None:
        heapq.heappush(self._heap, (time, next(self._seq), event))

    def schedule_all(self, events: Iterable[FrameArrival]) -> None:
        for ev in events:
            self.schedule(ev.time, ev)

    def __bool__(self):
        return bool(self._heap)

    def pop(self) -> Optional[tuple[float, Any]]:
        """Next event, or None once the queue is empty or past max_time."""
        if not self._heap or self._heap[0][0] > self.max_time:
            return None
        time, _, event = heapq.heappop(self._heap)
        self.now = time
        return time, event

    def pending(self) -> int:
        return len(self._heap)


@dataclass
class RunResult:
    ledger: MetricsLedger
    trace: list[TraceEvent]
    seed: int
    end_time: float = 0
    nodes: dict = field(default_factory=dict, repr=False)

    def trace_text(self) -> str:
        return "\n".join([TRACE_HEADER] + [e.line() for e in self.trace]) + "\n"
