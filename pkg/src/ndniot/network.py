"""Drive node engines over the shared radio for one scenario and seed."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from . import node as engine
from .radio import (
    EventLoop, FrameArrival, MetricsLedger, RadioTopology, RunResult, TraceEvent,
    TransferRecord, transmit,
)
from .scenario import Scenario, resolve_topology
from .tables import NodeState
from .wire import Kind, Packet, chunk_suffix, encode, parse_name


@dataclass(frozen=True)
class ScenarioStart:
    consumer: str


@dataclass(frozen=True)
class TimerTick:
    node: str


def _pkt_fields(pkt: Optional[Packet]) -> dict:
    if pkt is None:
        return {}
    return {
        "kind": "I" if pkt.kind == Kind.INTEREST else "D",
        "name": str(pkt.name),
        "nonce": f"{pkt.nonce:08x}" if pkt.kind == Kind.INTEREST else "-",
    }


class NdnRun:
    def __init__(self, scenario: Scenario, topology: RadioTopology, seed: int,
                 record_trace: bool = True):
        scenario.check_nodes(topology)
        self.scenario = scenario
        self.topology = topology
        self.seed = seed
        self.config = scenario.strategy
        self.loop = EventLoop(scenario.max_time_ms)
        self.rng = random.Random(seed)
        self.ledger = MetricsLedger()
        self.trace: list[TraceEvent] = []
        self.record_trace = record_trace
        self.base = parse_name(scenario.base_name)
        cap = self.config.cache_capacity_chunks
        self.states = {
            n: NodeState(n, cache_capacity=cap, rng=random.Random(f"{seed}:{n}"))
            for n in topology.nodes
        }
        engine.make_producer(self.states[scenario.producer], self.base, scenario.k)
        self.records: dict[str, TransferRecord] = {}
        self._ticks: set[tuple[str, float]] = set()

    def _log(self, time, node, event, pkt=None, src="-", dst="-", name=None):
        if self.record_trace:
            fields = _pkt_fields(pkt)
            if name is not None:
                fields["name"] = name
            self.trace.append(TraceEvent(time, node, event, src=src, dst=dst, **fields))

    def run(self) -> RunResult:
        for i, c in enumerate(self.scenario.consumers):
            self.loop.schedule(i * self.scenario.consumer_stagger_ms, ScenarioStart(c))
        while True:
            item = self.loop.pop()
            if item is None:
                break
            now, ev = item
            if isinstance(ev, ScenarioStart):
                actions = self._start(ev.consumer, now)
                who = ev.consumer
            elif isinstance(ev, TimerTick):
                self._ticks.discard((ev.node, now))
                actions = engine.tick(self.states[ev.node], now, self.config)
                who = ev.node
            else:
                actions = self._arrival(ev, now)
                who = ev.node
            self._execute(who, actions, now)
            self._arm_timer(who)
        end = self.loop.now
        for rec in self.records.values():
            if rec.finished_at is None:
                rec.timed_out = True
                self._log(end, rec.consumer, "timeout", name=str(self.base))
        return RunResult(self.ledger, self.trace, self.seed, end, nodes=self.states)

    def _start(self, consumer: str, now: float):
        rec = TransferRecord(consumer, str(self.base), self.scenario.k, now)
        self.records[consumer] = rec
        self.ledger.transfers.append(rec)
        self._log(now, consumer, "start", name=str(self.base))
        actions = engine.start_fetch(self.states[consumer], self.base, self.scenario.k, now,
                                     self.config)
        if self.scenario.k == 0:
            rec.ok, rec.finished_at = True, now
            self._log(now, consumer, "complete", name=str(self.base))
        return actions

    def _arrival(self, ev: FrameArrival, now: float):
        state = self.states[ev.node]
        self.ledger.rx[ev.node] += 1
        actions = engine.tick(state, now, self.config)
        pkt, more = engine.receive_frame(state, ev.sender, ev.frame, ev.addressed_to, now,
                                         self.config)
        self._log(now, ev.node, "overhear" if ev.overheard else "rx", pkt, ev.sender,
                  ev.addressed_to or "*")
        return actions + more

    def _send(self, sender: str, pkt: Packet, dst: Optional[str], now: float):
        frame = encode(pkt)
        self._log(now, sender, "tx", pkt, sender, dst or "*")
        self.loop.schedule_all(transmit(self.topology, self.rng, sender, frame, dst, now,
                                        self.ledger))

    def _execute(self, who: str, actions, now: float):
        for a in actions:
            if isinstance(a, engine.Broadcast):
                self._send(who, a.packet, None, now)
            elif isinstance(a, engine.Unicast):
                self._send(who, a.packet, a.neighbor, now)
            elif isinstance(a, engine.Drop):
                self.ledger.count_drop(who, a.reason)
                self._log(now, who, f"drop-{a.reason}", a.packet)
            elif isinstance(a, engine.Deliver):
                self._deliver(who, a.event, now)

    def _deliver(self, who: str, ev: engine.TransferEvent, now: float):
        rec = self.records[who]
        if ev.kind == "chunk":
            rec.chunk_latencies.append(ev.latency_ms)
            rec.attempts_per_chunk.append(ev.attempts)
            name = str(self.base.child(chunk_suffix(ev.chunk)))
            self._log(now, who, "deliver", name=name)
        elif ev.kind == "complete":
            rec.ok, rec.finished_at = True, now
            self._log(now, who, "complete", name=str(self.base))
        elif ev.kind == "failed":
            rec.attempts_per_chunk.append(ev.attempts)
            rec.finished_at = now
            self._log(now, who, "fail", name=str(self.base.child(chunk_suffix(ev.chunk))))

    def _arm_timer(self, who: str):
        deadline = self.states[who].next_deadline()
        if deadline != float("inf") and (who, deadline) not in self._ticks:
            self._ticks.add((who, deadline))
            self.loop.schedule(deadline, TimerTick(who))


def run_ndn(scenario: Scenario, topology: RadioTopology, seed: int,
            record_trace: bool = True) -> RunResult:
    return NdnRun(scenario, topology, seed, record_trace).run()


def run(scenario: Scenario, topology: Optional[RadioTopology] = None, seed: Optional[int] = None,
        record_trace: bool = True) -> RunResult:
    """Simulate one seed of a scenario on either stack."""
    if topology is None:
        topology = resolve_topology(scenario.topology)
    if seed is None:
        seed = scenario.seed
    if scenario.stack == "baseline":
        from .baseline import run_fetch_baseline
        return run_fetch_baseline(scenario, topology, seed, record_trace=record_trace)
    return run_ndn(scenario, topology, seed, record_trace)
