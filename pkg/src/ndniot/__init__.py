"""Named Data Networking on constrained IoT radios: a discrete-event simulator.

Forwarding by interest flooding (VIF) or reactive optimistic name-based
routing (RONR), optional content forwarding aggregation (CFA) and
opportunistic near-path caching (ONPC), a proactive tree-routing baseline,
and closed-form transmission-count models.
"""

from .analytics import cached_best_tx, compare, multi_nocache_tx, ronr_tx, vif_tx
from .network import run
from .radio import RadioTopology, gen_grid, gen_line, load_topology
from .scenario import Scenario, load_presets, resolve_topology
from .strategies import Routing, StrategyConfig
from .wire import Name, Packet, decode, encode, parse_name

__version__ = "0.1.0"

__all__ = [
    "Name", "Packet", "RadioTopology", "Routing", "Scenario", "StrategyConfig",
    "cached_best_tx", "compare", "decode", "encode", "gen_grid", "gen_line",
    "load_presets", "load_topology", "multi_nocache_tx", "parse_name",
    "resolve_topology", "ronr_tx", "run", "vif_tx",
]
