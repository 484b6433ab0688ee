"""Command-line entry point: ``ndniot run | presets | verify``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import acceptance
from .analytics import DomainError
from .baseline import NoRoute, Unreachable
from .network import run
from .radio import TopologyError, UnknownNode
from .report import report_rows, to_csv
from .scenario import (
    DEFAULT_BASE_NAME, DEFAULT_BEACON_INTERVAL_MS, DEFAULT_STAGGER_MS, Scenario, ScenarioError,
    default_endpoints, load_presets, resolve_topology,
)
from .strategies import ConfigError, StrategyConfig
from .tables import DEFAULT_TEMP_FIB_MS

EXIT_CONFIG = 2
EXIT_FAILED = 1


def _on_off(text: str) -> bool:
    t = text.lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _topology_source(args) -> str:
    picked = [x for x in (args.topology, args.grid, args.line) if x]
    if len(picked) > 1:
        raise ScenarioError("use only one of --topology, --grid, --line")
    loss = f":{1 - args.loss:g}" if args.loss is not None else ""
    if args.grid:
        return f"grid:{args.grid}{loss}"
    if args.line:
        return f"line:{args.line}{loss}"
    if loss:
        raise ScenarioError("--loss applies to --grid and --line only")
    return args.topology or "sample10"


def scenario_from_args(args) -> Scenario:
    if args.loss is not None and not 0 <= args.loss < 1:
        raise ScenarioError("--loss must be in [0, 1)")
    source = _topology_source(args)
    topo = resolve_topology(source)
    d_prod, d_cons = default_endpoints(source, topo)
    consumers = [c for c in args.consumers.split(",") if c] if args.consumers else d_cons
    strategy = StrategyConfig(
        routing=args.routing, cfa=args.cfa, onpc=args.onpc,
        cache_capacity_chunks=args.cache, temp_fib_lifetime_ms=args.temp_fib_ms,
    )
    sc = Scenario(
        name=args.name, topology=source, producer=args.producer or d_prod,
        consumers=tuple(consumers), k=args.chunks, stack=args.stack, strategy=strategy,
        base_name=args.base_name, runs=args.runs, seed=args.seed,
        consumer_stagger_ms=args.stagger_ms, beacon_interval_ms=args.beacon_interval_ms,
        root=args.root,
    )
    sc.validate(topo)
    return sc


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_run(args) -> int:
    sc = scenario_from_args(args)
    rows = report_rows([sc], jobs=args.jobs)
    _write(args.csv, to_csv(rows))
    if args.trace:
        result = run(sc, seed=sc.seed, record_trace=True)
        Path(args.trace).write_text(result.trace_text())
    return 0


def cmd_presets(args) -> int:
    presets = load_presets(args.presets)
    if not args.names:
        for name, scenarios in presets.items():
            print(f"{name}: {len(scenarios)} scenario(s)")
            for sc in scenarios:
                cfg = sc.strategy
                print(f"  {sc.name}  topology={sc.topology} stack={sc.stack} "
                      f"routing={cfg.label} cache={cfg.cache_capacity_chunks} "
                      f"k={sc.k} m={sc.m} runs={sc.runs}")
        return 0
    unknown = [n for n in args.names if n not in presets]
    if unknown:
        raise ScenarioError(f"unknown preset(s): {', '.join(unknown)}")
    scenarios = [sc for n in args.names for sc in presets[n]]
    _write(args.csv, to_csv(report_rows(scenarios, jobs=args.jobs)))
    return 0


def _criteria(only: Optional[list[str]]) -> Optional[list[int]]:
    if not only:
        return None
    ids: set[int] = set()
    for token in only:
        for part in token.split(","):
            if part.isdigit():
                ids.add(int(part))
            elif part in acceptance.CRITERIA_BY_PRESET:
                ids.update(acceptance.CRITERIA_BY_PRESET[part])
            else:
                raise ScenarioError(f"unknown criterion or preset {part!r}")
    return sorted(ids)


def cmd_verify(args) -> int:
    only = _criteria(args.only)
    if args.presets:
        load_presets(args.presets)  # fail fast on a bad file
    verdicts = acceptance.run_all(only, args.presets, jobs=args.jobs)
    for v in verdicts:
        print(v.line())
    failed = sum(not v.passed for v in verdicts)
    print(f"{len(verdicts) - failed}/{len(verdicts)} criteria passed")
    return EXIT_FAILED if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ndniot", description="NDN over lossy IoT radio simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario over a seed sweep and print CSV")
    topo = r.add_argument_group("topology")
    topo.add_argument("--topology", help="sample10, sample20 or a topology file")
    topo.add_argument("--grid", metavar="RxC", help="generated grid, e.g. 3x4")
    topo.add_argument("--line", metavar="N", type=int, help="generated line of N nodes")
    topo.add_argument("--loss", type=float, metavar="P",
                      help="per-link loss probability for --grid/--line")
    r.add_argument("--stack", choices=["ndn", "baseline"], default="ndn")
    r.add_argument("--routing", choices=["vif", "ronr"], default="ronr")
    r.add_argument("--cfa", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--onpc", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--cache", type=int, default=0, metavar="N", help="cache size in chunks")
    r.add_argument("--consumers", metavar="a,b,c")
    r.add_argument("--producer", metavar="X")
    r.add_argument("--chunks", type=int, default=10, metavar="K")
    r.add_argument("--runs", type=int, default=20, metavar="R")
    r.add_argument("--seed", type=int, default=1, metavar="S")
    r.add_argument("--csv", metavar="PATH", help="write CSV here instead of stdout")
    r.add_argument("--trace", metavar="PATH", help="write the event trace of the first seed")
    r.add_argument("--name", default="run", help="scenario label in the CSV")
    r.add_argument("--base-name", default=DEFAULT_BASE_NAME)
    r.add_argument("--temp-fib-ms", type=int, default=DEFAULT_TEMP_FIB_MS)
    r.add_argument("--beacon-interval-ms", type=int, default=DEFAULT_BEACON_INTERVAL_MS)
    r.add_argument("--stagger-ms", type=int, default=DEFAULT_STAGGER_MS,
                   help="start offset between consecutive consumers")
    r.add_argument("--root", help="baseline tree root (default: producer)")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("presets", help="list bundled presets or run them")
    p.add_argument("names", nargs="*", help="presets to run (none: list them)")
    p.add_argument("--presets", metavar="FILE", help="preset file instead of the bundled one")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_presets)

    v = sub.add_parser("verify", help="run the acceptance criteria and print a table")
    v.add_argument("--only", action="append", metavar="X",
                   help="criterion number or preset name (repeatable, comma lists allowed)")
    v.add_argument("--presets", metavar="FILE")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ConfigError, TopologyError, UnknownNode, Unreachable, NoRoute,
            DomainError) as exc:
        print(f"ndniot: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
