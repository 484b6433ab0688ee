import random

from hypothesis import given, settings, strategies as st

from ndniot import invariants as inv
from ndniot.network import run
from ndniot.radio import TraceEvent

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_random_runs_keep_invariants(seed):
    rng = random.Random(seed)
    case = inv.random_case(rng)
    first = run(case.scenario, case.topology, case.seed)
    second = run(case.scenario, case.topology, case.seed)
    assert inv.check_run(case, first, second) == []


@settings(max_examples=200)
@given(seeds)
def test_pit_aggregation(seed):
    assert inv.check_pit_aggregation(random.Random(seed)) == []


@settings(max_examples=200)
@given(seeds)
def test_content_store_rules(seed):
    assert inv.check_cs_rules(random.Random(seed)) == []


@settings(max_examples=200)
@given(seeds)
def test_cfa_never_adds_data(seed):
    assert inv.check_cfa(random.Random(seed)) == []


# the checkers themselves must flag bad traces

def ev(t, node, event, kind="I", name="/riot/text/a", nonce="01"):
    return TraceEvent(t, node, event, kind, name, nonce)


def test_dedup_checker_flags_resend():
    trace = [ev(0, "x", "rx"), ev(5, "x", "tx"), ev(300, "x", "tx")]
    assert inv.check_dedup(trace)
    assert not inv.check_dedup([ev(5, "x", "tx"), ev(905, "x", "tx")])


def test_stop_and_go_checker_flags_sixth_try():
    trace = [ev(400 * i, "c", "tx", nonce=f"{i:02x}") for i in range(6)]
    assert any("6 times" in v for v in inv.check_stop_and_go(trace))


def test_stop_and_go_checker_flags_early_retry_and_skips():
    early = [ev(0, "c", "tx", nonce="01"), ev(100, "c", "tx", nonce="02")]
    assert inv.check_stop_and_go(early)
    skip = [ev(0, "c", "tx", nonce="01"), ev(10, "c", "tx", name="/riot/text/b", nonce="02")]
    assert inv.check_stop_and_go(skip)
    ok = skip[:1] + [ev(8, "c", "deliver", kind="-")] + skip[1:]
    assert not inv.check_stop_and_go(ok)


def test_data_checker_flags_spontaneous_data():
    assert inv.check_data_justified([ev(0, "x", "tx", kind="D")], "p")
    assert not inv.check_data_justified([ev(0, "p", "tx", kind="D")], "p")
