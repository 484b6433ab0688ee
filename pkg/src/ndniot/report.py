"""Scenario runs to CSV rows, with model comparison and exact means."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import fmean
from typing import Iterable, Optional

from . import analytics
from .network import run
from .radio import RadioTopology
from .scenario import Scenario, resolve_topology
from .strategies import Routing

COLUMNS = (
    "scenario", "stack", "strategy", "cfa", "onpc", "cache_chunks", "n", "m", "k", "seed",
    "tx_broadcast", "tx_unicast", "tx_total", "rx_total", "transfers_ok", "transfers_failed",
    "mean_chunk_latency_ms", "model_value", "deviation",
)
# columns averaged in the mean row
_NUMERIC = ("tx_broadcast", "tx_unicast", "tx_total", "rx_total", "transfers_ok",
            "transfers_failed", "mean_chunk_latency_ms")


@dataclass(frozen=True)
class RunRow:
    scenario: str
    seed: int
    tx_broadcast: int
    tx_unicast: int
    rx_total: int
    transfers_ok: int
    transfers_failed: int
    mean_chunk_latency_ms: Optional[float]

    @property
    def tx_total(self) -> int:
        return self.tx_broadcast + self.tx_unicast


def mean_hops(scenario: Scenario, topology: RadioTopology) -> float:
    hops = [topology.hop_distance(c, scenario.producer) for c in scenario.consumers]
    if any(h is None for h in hops):
        raise analytics.DomainError("producer unreachable from a consumer")
    return fmean(hops)


def model_value(scenario: Scenario, topology: RadioTopology) -> Optional[float]:
    """Closed-form total for the scenario, or None where no model applies."""
    if scenario.stack != "ndn" or scenario.k == 0:
        return None
    cfg = scenario.strategy
    n, k, m = len(topology.nodes), scenario.k, scenario.m
    h = mean_hops(scenario, topology)
    if cfg.routing is Routing.VIF:
        return m * analytics.vif_tx(n, k, h)
    if cfg.cache_capacity_chunks > 0 and m > 1:
        return analytics.cached_best_tx(n, k, m)
    return analytics.multi_nocache_tx(n, k, m, h)


def run_one(scenario: Scenario, seed: int, topology: Optional[RadioTopology] = None) -> RunRow:
    result = run(scenario, topology, seed, record_trace=False)
    led = result.ledger
    return RunRow(scenario.name, seed, led.total_broadcast, led.total_unicast, led.total_rx,
                  led.transfers_ok, led.transfers_failed, led.mean_chunk_latency())


def _run_job(job):
    scenario, seed = job
    return run_one(scenario, seed)


def sweep(scenarios: Iterable[Scenario], jobs: int = 1) -> dict[str, list[RunRow]]:
    """Every seed of every scenario; results keyed by scenario, seeds ascending."""
    scenarios = list(scenarios)
    work = [(sc, s) for sc in scenarios for s in sc.seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_job, work, chunksize=4))
    else:
        topos = {sc.topology: resolve_topology(sc.topology) for sc in scenarios}
        rows = [run_one(sc, s, topos[sc.topology]) for sc, s in work]
    out: dict[str, list[RunRow]] = {sc.name: [] for sc in scenarios}
    for r in rows:
        out[r.scenario].append(r)
    for lst in out.values():
        lst.sort(key=lambda r: r.seed)
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.3f}"


def exact_mean(values: list) -> Optional[Fraction]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return sum((Fraction(v) for v in vals), Fraction(0)) / len(vals)


def scenario_rows(scenario: Scenario, runs: list[RunRow],
                  topology: Optional[RadioTopology] = None) -> list[dict]:
    """Per-run rows followed by one mean row (seed ``mean``)."""
    topo = topology or resolve_topology(scenario.topology)
    cfg = scenario.strategy
    model = model_value(scenario, topo)
    common = {
        "scenario": scenario.name, "stack": scenario.stack,
        "strategy": cfg.routing.value if scenario.stack == "ndn" else "tree",
        "cfa": "on" if cfg.cfa else "off", "onpc": "on" if cfg.onpc else "off",
        "cache_chunks": cfg.cache_capacity_chunks if scenario.stack == "ndn" else 0,
        "n": len(topo.nodes), "m": scenario.m, "k": scenario.k,
        "model_value": _fmt(model),
    }

    def deviation(total) -> str:
        if model is None:
            return ""
        return _fmt(analytics.relative_deviation(float(total), model))

    rows = []
    for r in runs:
        row = dict(common, seed=str(r.seed))
        for col in _NUMERIC:
            row[col] = _fmt(getattr(r, col))
        row["deviation"] = deviation(r.tx_total)
        rows.append(row)
    mean_row = dict(common, seed="mean")
    for col in _NUMERIC:
        mean_row[col] = _fmt(exact_mean([getattr(r, col) for r in runs]))
    tot = exact_mean([r.tx_total for r in runs])
    mean_row["deviation"] = deviation(tot) if tot is not None else ""
    rows.append(mean_row)
    return rows


def report_rows(scenarios: list[Scenario], jobs: int = 1) -> list[dict]:
    results = sweep(scenarios, jobs)
    topos = {sc.topology: resolve_topology(sc.topology) for sc in scenarios}
    rows = []
    for sc in scenarios:
        rows.extend(scenario_rows(sc, results[sc.name], topos[sc.topology]))
    return rows


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def mean_of(rows: list[dict], scenario: str, column: str) -> float:
    for r in rows:
        if r["scenario"] == scenario and r["seed"] == "mean":
            return float(r[column])
    raise KeyError(scenario)
