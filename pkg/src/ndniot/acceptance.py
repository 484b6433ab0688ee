"""Acceptance harness: the eight end-to-end criteria, each returning a verdict."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

from . import analytics, invariants
from .network import run
from .radio import gen_line
from .report import RunRow, sweep
from .scenario import Scenario, load_presets
from .strategies import Routing, StrategyConfig
from .wire import (
    HEADER_LEN, MAX_COMPONENT_LEN, MAX_NAME_LEN, MTU, Data, Interest, Name, Packet, decode,
    encode, max_payload,
)


@dataclass(frozen=True)
class Verdict:
    id: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id}. {self.title}: {self.detail}"


def _mean(rows: list[RunRow], attr: str) -> float:
    return sum(getattr(r, attr) for r in rows) / len(rows)


class PresetRuns:
    """Lazily run preset scenarios once and share the results."""

    def __init__(self, path=None, jobs: int = 1):
        self.presets = load_presets(path)
        self.jobs = jobs
        self._runs: dict[str, list[RunRow]] = {}

    def scenario(self, preset: str, name: str) -> Scenario:
        for sc in self.presets[preset]:
            if sc.name == name:
                return sc
        raise KeyError(f"{preset} has no scenario {name}")

    def rows(self, preset: str, name: str) -> list[RunRow]:
        if name not in self._runs:
            wanted = [sc for sc in self.presets[preset] if sc.name not in self._runs]
            self._runs.update(sweep(wanted, self.jobs))
        return self._runs[name]


def formula_identities(cases: int = 1000, seed: int = 11) -> Verdict:
    rng = random.Random(seed)
    bad = 0
    for _ in range(cases):
        n = rng.randint(2, 2000)
        k = rng.randint(1, 200)
        h = rng.choice([None, rng.randint(1, n), rng.uniform(1, 50)])
        if analytics.vif_tx(n, 1, h) != analytics.ronr_tx(n, 1, h):
            bad += 1
        if analytics.multi_nocache_tx(n, k, 1, h) != analytics.ronr_tx(n, k, h):
            bad += 1
    return Verdict(1, "formula identities", bad == 0, f"{cases} random inputs, {bad} mismatches")


def simulator_model_equivalence() -> Verdict:
    worst = 0.0
    checked = 0
    for n in (4, 6, 10):
        topo = gen_line(n)
        consumer, producer = topo.nodes[0], topo.nodes[-1]
        for k in (5, 10, 20):
            for routing, model in ((Routing.VIF, analytics.vif_tx), (Routing.RONR, analytics.ronr_tx)):
                sc = Scenario(f"line{n}", f"line:{n}", producer, (consumer,), k=k,
                              strategy=StrategyConfig(routing), runs=1)
                led = run(sc, topo, sc.seed, record_trace=False).ledger
                cmp = analytics.compare(led, model(n, k, n - 1), tolerance=0.0)
                worst = max(worst, abs(cmp.deviation))
                checked += 1
    return Verdict(2, "simulator matches closed forms on lossless lines", worst == 0,
                   f"{checked} configurations, max |deviation| {worst:g}")


def ronr_saving(p: PresetRuns) -> Verdict:
    vif = p.rows("fig4-vif", "fig4-vif-k10")
    ronr = p.rows("fig4-ronr", "fig4-ronr-k10")
    k = p.scenario("fig4-ronr", "fig4-ronr-k10").k
    ratio = _mean(ronr, "tx_total") / _mean(vif, "tx_total")
    bc_limit = _mean(vif, "tx_broadcast") / k * 1.2
    bc = _mean(ronr, "tx_broadcast")
    ok = ratio <= 0.6 and bc <= bc_limit
    return Verdict(3, "RONR saving on sample10 (k=10)", ok,
                   f"RONR/VIF total {ratio:.3f} (<= 0.6); RONR broadcasts {bc:.2f} "
                   f"(<= {bc_limit:.2f})")


def caching_saving(p: PresetRuns) -> Verdict:
    off = p.rows("fig5", "fig5-m3-cache0")
    on = p.rows("fig5", "fig5-m3-cache20")
    ratio = _mean(on, "tx_total") / _mean(off, "tx_total")
    bc_off, bc_on = _mean(off, "tx_broadcast"), _mean(on, "tx_broadcast")
    bc_dev = (bc_on - bc_off) / bc_off
    uc_off, uc_on = _mean(off, "tx_unicast"), _mean(on, "tx_unicast")
    ok = ratio <= 0.7 and abs(bc_dev) <= 0.15 and uc_on < uc_off
    return Verdict(4, "caching saving on sample20 (k=20, m=3)", ok,
                   f"cached/uncached total {ratio:.3f} (<= 0.7); broadcasts {bc_on:.2f} vs "
                   f"{bc_off:.2f} ({bc_dev:+.1%}, within 15%); unicast {uc_on:.2f} < {uc_off:.2f}")


def linear_scaling(p: PresetRuns) -> Verdict:
    one = _mean(p.rows("fig5", "fig5-m1-cache0"), "tx_total")
    parts = []
    ok = True
    for m in (2, 3):
        got = _mean(p.rows("fig5", f"fig5-m{m}-cache0"), "tx_total")
        dev = got / (m * one) - 1
        ok = ok and abs(dev) <= 0.2
        parts.append(f"m={m}: {got:.2f} vs {m * one:.2f} ({dev:+.1%})")
    return Verdict(5, "linear scaling without cache", ok, "; ".join(parts) + " (within 20%)")


def baseline_gap(p: PresetRuns) -> Verdict:
    base = _mean(p.rows("fig6", "fig6-m3"), "tx_total")
    ndn = _mean(p.rows("fig5", "fig5-m3-cache20"), "tx_total")
    ratio = base / ndn
    return Verdict(6, "baseline needs more transmissions", ratio >= 1.5,
                   f"baseline {base:.2f} vs NDN cached {ndn:.2f}: {ratio:.2f}x (>= 1.5x)")


def protocol_invariants(cases: int = 500, seed: int = 2024) -> Verdict:
    rng = random.Random(seed)
    failures: list[str] = []
    for _ in range(cases):
        case = invariants.random_case(rng)
        first = run(case.scenario, case.topology, case.seed)
        second = run(case.scenario, case.topology, case.seed)
        failures += invariants.check_run(case, first, second)
        failures += invariants.check_pit_aggregation(rng)
        failures += invariants.check_cs_rules(rng)
        failures += invariants.check_cfa(rng)
    detail = f"{cases} random cases, {len(failures)} violations"
    if failures:
        detail += f"; first: {failures[0]}"
    return Verdict(7, "protocol invariants", not failures, detail)


_NAME_BYTES = [b for b in range(1, 256) if b != ord("/")]


def _random_component(rng: random.Random, limit: int) -> bytes:
    size = rng.randint(1, max(1, min(MAX_COMPONENT_LEN, limit)))
    return bytes(rng.choices(_NAME_BYTES, k=size))


def random_packet(rng: random.Random) -> Packet:
    budget = MAX_NAME_LEN if rng.random() < 0.5 else rng.randint(2, MAX_NAME_LEN)
    comps = []
    left = budget
    while left >= 2 and (not comps or rng.random() < 0.6):
        c = _random_component(rng, left - 1)
        comps.append(c)
        left -= len(c) + 1
    name = Name(tuple(comps))
    flags, hops = rng.randrange(256), rng.randrange(256)
    if rng.random() < 0.5:
        if HEADER_LEN + 1 + len(name.encoded) > MTU:
            return random_packet(rng)
        return Interest(name, rng.getrandbits(32), flags=flags, hop_count=hops)
    room = max_payload(name)
    if room < 0:
        return random_packet(rng)
    payload = bytes(rng.randrange(256) for _ in range(rng.randint(0, room)))
    return Data(name, payload, flags=flags, hop_count=hops)


def wire_round_trip(cases: int = 10_000, seed: int = 5) -> Verdict:
    rng = random.Random(seed)
    bad = 0
    for _ in range(cases):
        pkt = random_packet(rng)
        frame = encode(pkt)
        if decode(frame) != pkt or len(frame) > MTU:
            bad += 1
    data_len = len(encode(Data("/riot/text/a", bytes(30))))
    int_len = len(encode(Interest("/riot/text/a", 0x1234)))
    ok = bad == 0 and data_len == 58 and int_len == 29
    return Verdict(8, "wire round-trip and default sizes", ok,
                   f"{cases} packets, {bad} mismatches; Data {data_len} B (58), Interest {int_len} B (29)")


def run_all(only: Optional[list[int]] = None, presets_path=None, jobs: int = 1) -> list[Verdict]:
    p: Optional[PresetRuns] = None

    def presets() -> PresetRuns:
        nonlocal p
        if p is None:
            p = PresetRuns(presets_path, jobs)
        return p

    table: dict[int, Callable[[], Verdict]] = {
        1: formula_identities,
        2: simulator_model_equivalence,
        3: lambda: ronr_saving(presets()),
        4: lambda: caching_saving(presets()),
        5: lambda: linear_scaling(presets()),
        6: lambda: baseline_gap(presets()),
        7: protocol_invariants,
        8: wire_round_trip,
    }
    return [table[i]() for i in sorted(table) if only is None or i in only]


# preset names each criterion depends on, for ``verify --only``
CRITERIA_BY_PRESET = {
    "fig4": [3], "fig4-vif": [3], "fig4-ronr": [3], "fig5": [4, 5], "fig6": [6],
}
