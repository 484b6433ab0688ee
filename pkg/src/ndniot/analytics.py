"""Closed-form transmission counts for flooding, RONR and cached fetches.

All models take the node count ``n``, chunk count ``k`` and, where relevant,
the consumer count ``m``. Path length defaults to the sqrt(n) average-path
approximation; pass ``h`` to use a true hop count instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .radio import MetricsLedger


class DomainError(ValueError):
    pass


def _path(n: int, h: Optional[float]) -> float:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if h is None:
        return math.sqrt(n)
    if h < 1:
        raise DomainError(f"h must be >= 1, got {h}")
    return h


def _check_k(k: int, minimum: int) -> None:
    if k < minimum:
        raise DomainError(f"k must be >= {minimum}, got {k}")


def _check_m(m: int) -> None:
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")


def vif_tx(n: int, k: int, h: Optional[float] = None) -> float:
    """Every chunk floods once and returns along one path."""
    p = _path(n, h)
    _check_k(k, 0)
    return k * ((n - 1) + p)


def ronr_tx(n: int, k: int, h: Optional[float] = None) -> float:
    """One flood, then unicast Interest/Data pairs along the learned path."""
    p = _path(n, h)
    _check_k(k, 1)
    return (n - 1) + 2 * (k - 0.5) * p


def multi_nocache_tx(n: int, k: int, m: int, h: Optional[float] = None) -> float:
    _check_m(m)
    return m * ronr_tx(n, k, h)


def cached_best_tx(n: int, k: int, m: int) -> float:
    """Best case with caching, evaluated verbatim from its closed form.

    For typical parameters this exceeds ``multi_nocache_tx``; callers report
    that rather than correct it.
    """
    _check_k(k, 1)
    _check_m(m)
    root_n = _path(n, None)
    return 2 * (k - 0.5) * (root_n + n - 1) + n + m - 2


@dataclass(frozen=True)
class Comparison:
    model_value: float
    sim_value: float
    deviation: float
    passed: Optional[bool]  # None when the comparison is report-only


def relative_deviation(sim: float, model: float) -> float:
    if model == 0:
        return 0.0 if sim == 0 else math.inf
    return (sim - model) / model


def compare(ledger: MetricsLedger | float, model: float,
            tolerance: Optional[float] = 0.0) -> Comparison:
    """Relative deviation of a simulated total from a model value.

    ``tolerance=None`` marks the row as report-only (lossy runs, where the
    loss-free models do not apply).
    """
    sim = ledger.total_tx if isinstance(ledger, MetricsLedger) else float(ledger)
    dev = relative_deviation(sim, model)
    passed = None if tolerance is None else abs(dev) <= tolerance
    return Comparison(model, sim, dev, passed)
