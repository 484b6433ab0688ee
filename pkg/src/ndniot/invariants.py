"""Protocol invariant checks over traces and single-node table operations.

Each ``check_*`` function returns a list of human-readable violations; an
empty list means the invariant held. ``random_case`` builds a small random
scenario so the same checks can be driven by a seeded generator.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from . import node as engine
from . import tables
from .radio import RadioTopology, RunResult, TraceEvent, gen_grid, gen_line
from .scenario import Scenario
from .strategies import Routing, StrategyConfig
from .tables import NONCE_TIMEOUT_MS, INTEREST_TIMEOUT_MS, MAX_TRIES, NodeState, Priority
from .wire import Data, Interest, Name, parse_name


def check_dedup(trace: list[TraceEvent]) -> list[str]:
    """No node puts the same (name, nonce) Interest on air twice within the nonce timeout."""
    last: dict[tuple, float] = {}
    bad = []
    for e in trace:
        if e.event != "tx" or e.kind != "I":
            continue
        key = (e.node, e.name, e.nonce)
        if key in last and e.time - last[key] < NONCE_TIMEOUT_MS:
            bad.append(f"{e.node} re-sent {e.name} nonce {e.nonce} after {e.time - last[key]} ms")
        last[key] = e.time
    return bad


def originated_interests(trace: list[TraceEvent]) -> dict[str, list[TraceEvent]]:
    """Interest transmissions whose nonce the sender never received first."""
    heard: dict[str, set] = defaultdict(set)
    out: dict[str, list[TraceEvent]] = defaultdict(list)
    for e in trace:
        if e.kind != "I":
            continue
        if e.event in ("rx", "overhear"):
            heard[e.node].add(e.nonce)
        elif e.event == "tx" and e.nonce not in heard[e.node]:
            out[e.node].append(e)
    return out


def check_stop_and_go(trace: list[TraceEvent]) -> list[str]:
    """At most MAX_TRIES sends per chunk and one outstanding Interest per consumer."""
    bad = []
    delivered: dict[str, list[tuple[float, str]]] = defaultdict(list)
    for e in trace:
        if e.event == "deliver":
            delivered[e.node].append((e.time, e.name))
    for consumer, sends in originated_interests(trace).items():
        per_chunk = defaultdict(int)
        for s in sends:
            per_chunk[s.name] += 1
        for name, n in per_chunk.items():
            if n > MAX_TRIES:
                bad.append(f"{consumer} sent {name} {n} times")
        for a, b in zip(sends, sends[1:]):
            if a.name == b.name:
                if b.time - a.time < INTEREST_TIMEOUT_MS:
                    bad.append(f"{consumer} retried {a.name} after {b.time - a.time} ms")
            elif not any(a.time <= t <= b.time and n == a.name for t, n in delivered[consumer]):
                bad.append(f"{consumer} moved from {a.name} to {b.name} without delivery")
    return bad


def check_data_justified(trace: list[TraceEvent], producer: str) -> list[str]:
    """A non-producer only sends Data it has previously received or overheard."""
    has: dict[str, set] = defaultdict(set)
    bad = []
    for e in trace:
        if e.kind != "D":
            continue
        if e.event in ("rx", "overhear"):
            has[e.node].add(e.name)
        elif e.event == "tx" and e.node != producer and e.name not in has[e.node]:
            bad.append(f"{e.node} sent {e.name} out of nowhere")
    return bad


def check_cs_bounds(states: dict[str, NodeState]) -> list[str]:
    return [f"{n}: {len(s.cs)} entries > capacity {s.cache_capacity}"
            for n, s in states.items() if len(s.cs) > max(s.cache_capacity, 0)]


# -- single-node checks -------------------------------------------------------

_BASE = parse_name("/riot/text")


def _config(rng: random.Random) -> StrategyConfig:
    cache = rng.choice([0, 0, 1, 3, 20])
    return StrategyConfig(
        routing=rng.choice(list(Routing)), cfa=rng.random() < 0.5,
        onpc=cache > 0 and rng.random() < 0.5, cache_capacity_chunks=cache,
    )


def check_pit_aggregation(rng: random.Random) -> list[str]:
    """Interests for one name from d distinct neighbors cause at most one upstream send."""
    config = _config(rng)
    state = NodeState("x", cache_capacity=config.cache_capacity_chunks, rng=random.Random(0))
    if config.routing is Routing.RONR and rng.random() < 0.5:
        tables.fib_insert(state, _BASE, "up", 10_000, temporary=True)
    name = _BASE.child(rng.choice("abcdef"))
    d = rng.randint(2, 6)
    faces = [f"n{i}" for i in range(d)]
    rng.shuffle(faces)
    times = sorted(rng.uniform(0, tables.PIT_LIFETIME_MS - 1) for _ in faces)
    upstream = 0
    for face, t in zip(faces, times):
        acts = engine.on_interest(state, face, Interest(name, rng.getrandbits(32)), t, config)
        upstream += sum(isinstance(a, (engine.Broadcast, engine.Unicast)) for a in acts)
    if upstream > 1:
        return [f"{d} neighbors caused {upstream} upstream Interests"]
    return []


def check_cs_rules(rng: random.Random) -> list[str]:
    """Replay random inserts/lookups against a reference LRU with priority classes."""
    cap = rng.randint(1, 6)
    state = NodeState("x", cache_capacity=cap)
    model: list[tuple[Name, Priority]] = []  # least- to most-recently used
    bad = []
    names = [_BASE.child(c) for c in "abcdefghij"]
    for step in range(rng.randint(5, 40)):
        name = rng.choice(names)
        now = float(step)
        if rng.random() < 0.3:
            hit = tables.cs_lookup(state, name, now)
            idx = next((i for i, (n, _) in enumerate(model) if n == name), None)
            if (hit is None) != (idx is None):
                bad.append(f"lookup {name} disagrees with reference")
            if idx is not None:
                model.append(model.pop(idx))
            continue
        prio = rng.choice(list(Priority))
        before = {n: p for n, p in model}
        ok = tables.cs_insert(state, Data(name, b"x"), prio, now)
        idx = next((i for i, (n, _) in enumerate(model) if n == name), None)
        if idx is not None:
            _, p = model.pop(idx)
            model.append((name, max(p, prio)))
        elif len(model) < cap:
            model.append((name, prio))
        else:
            victim = next((i for i, (_, p) in enumerate(model) if p == Priority.UNSOLICITED), None)
            if victim is None and prio == Priority.SOLICITED:
                victim = 0
            if victim is None:
                if ok:
                    bad.append(f"unsolicited {name} admitted into a full solicited store")
            else:
                model.pop(victim)
                model.append((name, prio))
        if len(state.cs) > cap:
            bad.append(f"store grew to {len(state.cs)} > {cap}")
        got = [(n, e.priority) for n, e in state.cs.items()]
        if got != model:
            bad.append(f"store {got} differs from reference {model}")
            break
        lost = {n for n, p in before.items() if p == Priority.SOLICITED} - set(state.cs)
        if lost and prio == Priority.UNSOLICITED:
            bad.append(f"solicited {lost} evicted for unsolicited {name}")
    return bad


def check_cfa(rng: random.Random) -> list[str]:
    """For the same PIT state, CFA never emits more Data than per-face unicast."""
    d = rng.randint(1, 6)
    faces = {f"n{i}" for i in range(d)}
    if rng.random() < 0.3:
        faces.add(tables.LOCAL)
    name = _BASE.child("a")
    counts = {}
    for cfa in (False, True):
        config = StrategyConfig(routing=rng.choice(list(Routing)), cfa=cfa)
        state = NodeState("x", rng=random.Random(0))
        state.pit[name] = tables.PitEntry(name, set(faces), 900, {}, 0)
        acts = engine.on_data(state, "up", Data(name, b"p"), 1, config)
        counts[cfa] = sum(isinstance(a, (engine.Broadcast, engine.Unicast)) for a in acts)
    if counts[True] > counts[False]:
        return [f"CFA sent {counts[True]} Data for {sorted(faces)}, plain sent {counts[False]}"]
    return []


# -- random simulation cases --------------------------------------------------

@dataclass
class Case:
    scenario: Scenario
    topology: RadioTopology
    seed: int


def _random_graph(rng: random.Random) -> RadioTopology:
    n = rng.randint(3, 9)
    nodes = [f"r{i}" for i in range(n)]
    edges = {}

    def link(a, b):
        edges[(a, b)] = rng.choice([1.0, 1.0, rng.uniform(0.3, 1.0)])
        edges[(b, a)] = rng.choice([1.0, rng.uniform(0.3, 1.0), 0.0])

    for i in range(1, n):
        link(nodes[i], nodes[rng.randrange(i)])
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(nodes, 2)
        if (a, b) not in edges:
            link(a, b)
    return RadioTopology(nodes, edges)


def random_case(rng: random.Random) -> Case:
    shape = rng.choice(["line", "grid", "graph"])
    if shape == "line":
        topo = gen_line(rng.randint(2, 7), rng.choice([1.0, rng.uniform(0.5, 1.0)]))
    elif shape == "grid":
        topo = gen_grid(rng.randint(1, 3), rng.randint(2, 3), rng.choice([1.0, rng.uniform(0.5, 1.0)]))
    else:
        topo = _random_graph(rng)
    nodes = list(topo.nodes)
    producer = rng.choice(nodes)
    others = [n for n in nodes if n != producer]
    consumers = rng.sample(others, rng.randint(1, min(3, len(others))))
    scenario = Scenario(
        name="case", topology=shape, producer=producer, consumers=tuple(consumers),
        k=rng.randint(0, 5), strategy=_config(rng), runs=1,
        consumer_stagger_ms=rng.choice([0, 5, 200, 1500]), max_time_ms=20_000,
    )
    return Case(scenario, topo, rng.randrange(1 << 30))


def check_run(case: Case, first: RunResult, second: Optional[RunResult] = None) -> list[str]:
    bad = []
    bad += check_dedup(first.trace)
    bad += check_stop_and_go(first.trace)
    bad += check_data_justified(first.trace, case.scenario.producer)
    bad += check_cs_bounds(first.nodes)
    if second is not None and first.trace_text() != second.trace_text():
        bad.append("trace differs between identical runs")
    return bad
