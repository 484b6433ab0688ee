"""Proactive tree-routing baseline standing in for 6LoWPAN/RPL/UDP.

The tree is a breadth-first DODAG over links that deliver at least half of
the frames in both directions. Point-to-point traffic goes up to the lowest
common ancestor and back down (storing mode). While measured transfers run,
every node broadcasts a beacon once per interval; the bootstrap traffic
that built the tree is not counted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .radio import (
    EventLoop, FrameArrival, MetricsLedger, RadioTopology, RunResult, TraceEvent, TransferRecord,
    transmit,
)
from .scenario import Scenario
from .tables import INTEREST_TIMEOUT_MS, MAX_TRIES
from .wire import chunk_name, parse_name

GOOD_LINK = 0.5
UDP_HEADER_LEN = 15
BEACON_LEN = 40
PAYLOAD_LEN = 30


class Unreachable(ValueError):
    def __init__(self, nodes):
        self.nodes = sorted(nodes)
        super().__init__(f"not reachable over good bidirectional links: {', '.join(self.nodes)}")


class NoRoute(ValueError):
    pass


@dataclass
class TreeState:
    node: str
    rank: int
    parent: Optional[str] = None
    children: set[str] = field(default_factory=set)
    routes: dict[str, str] = field(default_factory=dict)  # descendant -> child next hop
    beacon_interval_ms: int = 1000


def good_neighbors(topology: RadioTopology, node: str) -> list[str]:
    return [v for v in topology.neighbors(node)
            if topology.probability(node, v) >= GOOD_LINK
            and topology.probability(v, node) >= GOOD_LINK]


def converge(topology: RadioTopology, root: str, rng: Optional[random.Random] = None,
             beacon_interval_ms: int = 1000) -> dict[str, TreeState]:
    """Build the routing tree rooted at ``root``.

    ``rng`` is accepted for interface symmetry; construction is deterministic
    (ties go to the lowest node label).
    """
    if root not in topology.nodes:
        raise Unreachable([root])
    rank = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for v in good_neighbors(topology, u):
                if v not in rank:
                    rank[v] = rank[u] + 1
                    nxt.append(v)
        frontier = nxt
    missing = set(topology.nodes) - set(rank)
    if missing:
        raise Unreachable(missing)

    states = {n: TreeState(n, r, beacon_interval_ms=beacon_interval_ms) for n, r in rank.items()}
    for n, st in states.items():
        if n == root:
            continue
        st.parent = min(v for v in good_neighbors(topology, n) if rank.get(v) == st.rank - 1)
        states[st.parent].children.add(n)
    for n in states:
        child, at = n, states[n].parent
        while at is not None:
            states[at].routes[n] = child
            child, at = at, states[at].parent
    return states


def next_hop(states: dict[str, TreeState], at: str, dst: str) -> Optional[str]:
    if at == dst:
        return None
    st = states[at]
    if dst in st.routes:
        return st.routes[dst]
    if st.parent is None:
        raise NoRoute(f"{dst} is not below {at}")
    return st.parent


def route(states: dict[str, TreeState], src: str, dst: str) -> list[tuple[str, str]]:
    """Hops from ``src`` to ``dst`` through their lowest common ancestor."""
    if src not in states or dst not in states:
        raise NoRoute(f"{src} -> {dst}: node not in tree")
    hops = []
    at = src
    while at != dst:
        nh = next_hop(states, at, dst)
        hops.append((at, nh))
        at = nh
        if len(hops) > 2 * len(states):
            raise NoRoute(f"{src} -> {dst}: routing loop")
    return hops


@dataclass(frozen=True)
class Datagram:
    kind: str  # "req", "resp" or "beacon"
    src: str
    dst: str
    name: str = ""
    seq: int = 0

    def __len__(self):
        if self.kind == "beacon":
            return BEACON_LEN
        size = UDP_HEADER_LEN + len(self.name)
        return size + PAYLOAD_LEN if self.kind == "resp" else size


@dataclass(frozen=True)
class _Start:
    consumer: str


@dataclass(frozen=True)
class _Retry:
    consumer: str
    seq: int


@dataclass(frozen=True)
class _Beacon:
    node: str


@dataclass
class _Fetch:
    record: TransferRecord
    next_chunk: int = 0
    attempts: int = 0
    seq: int = 0
    chunk_started_at: float = 0
    active: bool = True


class BaselineRun:
    def __init__(self, scenario: Scenario, topology: RadioTopology, seed: int,
                 record_trace: bool = True):
        scenario.check_nodes(topology)
        self.scenario = scenario
        self.topology = topology
        self.seed = seed
        self.root = scenario.root or scenario.producer
        self.tree = converge(topology, self.root, beacon_interval_ms=scenario.beacon_interval_ms)
        self.loop = EventLoop(scenario.max_time_ms)
        self.rng = random.Random(seed)
        self.ledger = MetricsLedger()
        self.trace: list[TraceEvent] = []
        self.record_trace = record_trace
        self.base = parse_name(scenario.base_name)
        self.fetches: dict[str, _Fetch] = {}
        self.pending_starts = len(scenario.consumers)

    def _log(self, time, node, event, d: Optional[Datagram] = None, src="-", dst="-", name="-"):
        if not self.record_trace:
            return
        kind = {"req": "Q", "resp": "R", "beacon": "B"}.get(d.kind, "-") if d else "-"
        self.trace.append(TraceEvent(time, node, event, kind, d.name or "-" if d else name,
                                     str(d.seq) if d else "-", src, dst))

    @property
    def measuring(self) -> bool:
        return self.pending_starts > 0 or any(f.active for f in self.fetches.values())

    def run(self) -> RunResult:
        sc = self.scenario
        for i, c in enumerate(sc.consumers):
            self.loop.schedule(i * sc.consumer_stagger_ms, _Start(c))
        if sc.beacon_interval_ms > 0:
            phase_rng = random.Random(f"{self.seed}:beacons")
            for n in self.topology.nodes:
                self.loop.schedule(phase_rng.uniform(0, sc.beacon_interval_ms), _Beacon(n))
        while True:
            item = self.loop.pop()
            if item is None:
                break
            now, ev = item
            if isinstance(ev, _Start):
                self._start(ev.consumer, now)
            elif isinstance(ev, _Retry):
                self._retry(ev, now)
            elif isinstance(ev, _Beacon):
                if self.measuring:
                    self._send(ev.node, Datagram("beacon", ev.node, "*"), None, now)
                    self.loop.schedule(now + sc.beacon_interval_ms, ev)
            else:
                self._arrival(ev, now)
        end = self.loop.now
        for f in self.fetches.values():
            if f.active:
                f.record.timed_out = True
        return RunResult(self.ledger, self.trace, self.seed, end, nodes=self.tree)

    def _send(self, sender: str, d: Datagram, to: Optional[str], now: float):
        self._log(now, sender, "tx", d, sender, to or "*")
        self.loop.schedule_all(transmit(self.topology, self.rng, sender, d, to, now, self.ledger))

    def _forward(self, at: str, d: Datagram, now: float):
        try:
            nh = next_hop(self.tree, at, d.dst)
        except NoRoute:
            nh = None
        if nh is None:
            self.ledger.count_drop(at, "no-route")
            return
        self._send(at, d, nh, now)

    def _start(self, consumer: str, now: float):
        self.pending_starts -= 1
        rec = TransferRecord(consumer, str(self.base), self.scenario.k, now)
        self.ledger.transfers.append(rec)
        f = _Fetch(rec)
        self.fetches[consumer] = f
        self._log(now, consumer, "start", name=str(self.base))
        if self.scenario.k == 0:
            f.active = False
            rec.ok, rec.finished_at = True, now
            return
        self._request(consumer, f, now)

    def _request(self, consumer: str, f: _Fetch, now: float):
        f.attempts += 1
        f.seq += 1
        if f.attempts == 1:
            f.chunk_started_at = now
        name = str(chunk_name(self.base, f.next_chunk))
        self._forward(consumer, Datagram("req", consumer, self.scenario.producer, name, f.seq), now)
        self.loop.schedule(now + INTEREST_TIMEOUT_MS, _Retry(consumer, f.seq))

    def _retry(self, ev: _Retry, now: float):
        f = self.fetches[ev.consumer]
        if not f.active or f.seq != ev.seq:
            return
        if f.attempts >= MAX_TRIES:
            f.active = False
            f.record.attempts_per_chunk.append(f.attempts)
            f.record.finished_at = now
            self._log(now, ev.consumer, "fail", name=str(chunk_name(self.base, f.next_chunk)))
            return
        self._request(ev.consumer, f, now)

    def _arrival(self, ev: FrameArrival, now: float):
        node, d = ev.node, ev.frame
        self.ledger.rx[node] += 1
        if ev.addressed_to is None or ev.overheard:
            return
        self._log(now, node, "rx", d, ev.sender, node)
        if d.dst != node:
            self._forward(node, d, now)
        elif d.kind == "req" and node == self.scenario.producer:
            self._forward(node, Datagram("resp", node, d.src, d.name, d.seq), now)
        elif d.kind == "resp":
            self._response(node, d, now)

    def _response(self, node: str, d: Datagram, now: float):
        f = self.fetches.get(node)
        if f is None or not f.active or d.name != str(chunk_name(self.base, f.next_chunk)):
            self.ledger.count_drop(node, "stale")
            return
        rec = f.record
        rec.chunk_latencies.append(now - f.chunk_started_at)
        rec.attempts_per_chunk.append(f.attempts)
        self._log(now, node, "deliver", name=d.name)
        f.next_chunk += 1
        f.attempts = 0
        if f.next_chunk >= rec.chunks:
            f.active = False
            rec.ok, rec.finished_at = True, now
            self._log(now, node, "complete", name=str(self.base))
            return
        self._request(node, f, now)


def run_fetch_baseline(scenario: Scenario, topology: RadioTopology, seed: int,
                       record_trace: bool = True) -> RunResult:
    return BaselineRun(scenario, topology, seed, record_trace).run()
