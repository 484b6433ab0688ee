import random

import pytest

from ndniot import node as engine
from ndniot import tables
from ndniot.strategies import Routing, StrategyConfig
from ndniot.tables import NodeState, PitEntry, Priority, TransferAlreadyActive
from ndniot.wire import Data, Interest, parse_name

BASE = parse_name("/riot/text")
A = parse_name("/riot/text/a")
VIF = StrategyConfig(Routing.VIF)
RONR = StrategyConfig(Routing.RONR)


def fresh(name="x", cache=0):
    return NodeState(name, cache_capacity=cache, rng=random.Random(1))


def tx(actions):
    return [a for a in actions if isinstance(a, (engine.Broadcast, engine.Unicast))]


# -- tables -------------------------------------------------------------------

def test_cs_lru_evicts_oldest_solicited():
    s = fresh(cache=20)
    names = [BASE.child(f"c{i}") for i in range(21)]
    for i, n in enumerate(names[:20]):
        assert tables.cs_insert(s, Data(n, b"x"), Priority.SOLICITED, i)
    tables.cs_lookup(s, names[0], 20)  # touch the oldest so c1 becomes LRU
    tables.cs_insert(s, Data(names[20], b"x"), Priority.SOLICITED, 21)
    assert len(s.cs) == 20
    assert names[1] not in s.cs and names[0] in s.cs


def test_cs_refuses_unsolicited_when_full_of_solicited():
    s = fresh(cache=2)
    tables.cs_insert(s, Data(BASE.child("a"), b"x"), Priority.SOLICITED, 0)
    tables.cs_insert(s, Data(BASE.child("b"), b"x"), Priority.SOLICITED, 1)
    assert not tables.cs_insert(s, Data(BASE.child("c"), b"x"), Priority.UNSOLICITED, 2)
    assert s.cs_refused == 1
    assert set(s.cs) == {BASE.child("a"), BASE.child("b")}


def test_cs_solicited_displaces_unsolicited_first():
    s = fresh(cache=2)
    tables.cs_insert(s, Data(BASE.child("a"), b"x"), Priority.SOLICITED, 0)
    tables.cs_insert(s, Data(BASE.child("b"), b"x"), Priority.UNSOLICITED, 1)
    tables.cs_insert(s, Data(BASE.child("c"), b"x"), Priority.SOLICITED, 2)
    assert set(s.cs) == {BASE.child("a"), BASE.child("c")}


def test_cs_zero_capacity_and_miss():
    s = fresh(cache=0)
    assert not tables.cs_insert(s, Data(A, b"x"), Priority.SOLICITED, 0)
    assert tables.cs_lookup(s, A) is None


def test_fib_longest_prefix_then_newest():
    s = fresh()
    tables.fib_insert(s, parse_name("/riot"), "A", 100)
    tables.fib_insert(s, BASE, "B", 100)
    assert tables.fib_lookup(s, A, 0) == "B"
    tables.fib_insert(s, BASE, "C", 100)
    assert tables.fib_lookup(s, A, 0) == "C"
    assert tables.fib_lookup(s, A, 100) is None
    assert tables.fib_lookup(fresh(), A, 0) is None


def test_fib_one_entry_per_prefix_face():
    s = fresh()
    tables.fib_insert(s, BASE, "B", 100)
    tables.fib_insert(s, BASE, "B", 500)
    assert len(s.fib) == 1
    assert tables.fib_lookup(s, A, 400) == "B"


def test_nonce_memory_expires():
    s = fresh()
    tables.remember_nonce(s, A, 7, 0)
    assert tables.seen_nonce(s, A, 7, 899)
    assert not tables.seen_nonce(s, A, 7, 900)
    assert not tables.seen_nonce(s, A, 8, 10)


# -- on_interest ----------------------------------------------------------------

def test_producer_answers_and_never_floods():
    s = fresh("p")
    engine.make_producer(s, BASE, 3)
    acts = engine.on_interest(s, "n1", Interest(A, 5), 0, VIF)
    assert len(acts) == 1 and isinstance(acts[0], engine.Unicast)
    assert acts[0].neighbor == "n1" and acts[0].packet.name == A
    assert len(acts[0].packet.payload) == 30
    missing = engine.on_interest(s, "n1", Interest(BASE.child("z"), 6), 0, VIF)
    assert tx(missing) == [] and missing[0].reason == "no-such-chunk"


def test_duplicate_nonce_dropped():
    s = fresh()
    assert tx(engine.on_interest(s, "n1", Interest(A, 5), 0, VIF))
    assert tx(engine.on_interest(s, "n2", Interest(A, 5), 100, VIF)) == []


def test_pit_aggregation_then_data_to_both():
    s = fresh()
    first = engine.on_interest(s, "n1", Interest(A, 1), 0, VIF)
    assert isinstance(first[0], engine.Broadcast)
    assert engine.on_interest(s, "n2", Interest(A, 2), 10, VIF) == []
    assert s.pit[A].incoming == {"n1", "n2"}
    out = engine.on_data(s, "up", Data(A, b"p"), 20, VIF)
    assert sorted(a.neighbor for a in tx(out)) == ["n1", "n2"]
    assert A not in s.pit


def test_retransmission_from_same_face_is_forwarded():
    s = fresh()
    engine.on_interest(s, "n1", Interest(A, 1), 0, VIF)
    assert tx(engine.on_interest(s, "n1", Interest(A, 2), 400, VIF))


def test_cs_hit_answers_without_forwarding():
    s = fresh(cache=5)
    tables.cs_insert(s, Data(A, b"p"), Priority.SOLICITED, 0)
    acts = engine.on_interest(s, "n1", Interest(A, 1), 1, VIF)
    assert acts == [engine.Unicast(Data(A, b"p"), "n1")]


# -- on_data ----------------------------------------------------------------------

def test_ronr_installs_reverse_route():
    s = fresh()
    engine.on_interest(s, "n1", Interest(A, 1), 0, RONR)
    acts = engine.on_data(s, "up", Data(A, b"p"), 10, RONR)
    assert [type(a) for a in acts] == [engine.Unicast]
    assert tables.fib_lookup(s, BASE.child("b"), 11) == "up"
    assert tables.fib_lookup(s, BASE.child("b"), 10 + 5000) is None


def test_vif_installs_nothing():
    s = fresh()
    engine.on_interest(s, "n1", Interest(A, 1), 0, VIF)
    engine.on_data(s, "up", Data(A, b"p"), 10, VIF)
    assert not s.fib


def test_cfa_broadcasts_for_two_faces():
    s = fresh()
    s.pit[A] = PitEntry(A, {"n1", "n2"}, 900, {}, 0)
    acts = engine.on_data(s, "up", Data(A, b"p"), 1, StrategyConfig(cfa=True))
    assert len(acts) == 1 and isinstance(acts[0], engine.Broadcast)


def test_cfa_single_face_stays_unicast():
    s = fresh()
    s.pit[A] = PitEntry(A, {"n1"}, 900, {}, 0)
    acts = engine.on_data(s, "up", Data(A, b"p"), 1, StrategyConfig(cfa=True))
    assert isinstance(acts[0], engine.Unicast)


def test_unsolicited_and_overheard_data():
    s = fresh(cache=4)
    assert engine.on_data(s, "up", Data(A, b"p"), 0, VIF)[0].reason == "unsolicited"
    onpc = StrategyConfig(onpc=True, cache_capacity_chunks=4)
    assert engine.on_data(s, "up", Data(A, b"p"), 0, onpc, overheard=True) == []
    assert s.cs[A].priority == Priority.UNSOLICITED
    # a later solicited copy upgrades the entry
    s.pit[A] = PitEntry(A, {"n1"}, 900, {}, 0)
    engine.on_data(s, "up", Data(A, b"p"), 1, onpc)
    assert s.cs[A].priority == Priority.SOLICITED


def test_overheard_data_never_satisfies_pit():
    s = fresh()
    s.pit[A] = PitEntry(A, {"n1"}, 900, {}, 0)
    acts = engine.on_data(s, "up", Data(A, b"p"), 1, VIF, overheard=True)
    assert tx(acts) == [] and A in s.pit


def test_no_data_sent_back_to_sender():
    s = fresh()
    s.pit[A] = PitEntry(A, {"n1", "up"}, 900, {}, 0)
    acts = engine.on_data(s, "up", Data(A, b"p"), 1, VIF)
    assert [a.neighbor for a in tx(acts)] == ["n1"]


# -- consumer -------------------------------------------------------------------------

def test_start_fetch_first_interest():
    s = fresh("c")
    acts = engine.start_fetch(s, BASE, 10, 0, VIF)
    assert isinstance(acts[0], engine.Broadcast) and acts[0].packet.name == A


def test_start_fetch_zero_chunks():
    s = fresh("c")
    assert engine.start_fetch(s, BASE, 0, 0, VIF) == []
    assert not s.transfers[BASE].active


def test_transfer_already_active():
    s = fresh("c")
    engine.start_fetch(s, BASE, 2, 0, VIF)
    with pytest.raises(TransferAlreadyActive):
        engine.start_fetch(s, BASE, 2, 1, VIF)


def test_one_chunk_completes():
    s = fresh("c")
    engine.start_fetch(s, BASE, 1, 0, VIF)
    acts = engine.on_data(s, "up", Data(A, b"p"), 30, VIF)
    kinds = [a.event.kind for a in acts if isinstance(a, engine.Deliver)]
    assert kinds == ["chunk", "complete"]


def test_gives_up_after_five_tries():
    s = fresh("c")
    sent = tx(engine.start_fetch(s, BASE, 3, 0, VIF))
    nonces = {sent[0].packet.nonce}
    for i in range(1, 5):
        acts = tx(engine.tick(s, i * 400, VIF))
        assert len(acts) == 1
        nonces.add(acts[0].packet.nonce)
    assert len(nonces) == 5
    acts = engine.tick(s, 2000, VIF)
    assert tx(acts) == []
    assert acts[0].event.kind == "failed" and acts[0].event.attempts == 5
    assert engine.tick(s, 5000, VIF) == []


def test_nothing_due():
    s = fresh("c")
    engine.start_fetch(s, BASE, 3, 0, VIF)
    assert engine.tick(s, 399, VIF) == []


def test_unicast_timeout_reverts_to_flood():
    s = fresh("c")
    engine.start_fetch(s, BASE, 3, 0, RONR)
    engine.on_data(s, "r", Data(A, b"p"), 20, RONR)
    assert s.transfers[BASE].unicast_via == (BASE, "r")
    acts = tx(engine.tick(s, 420, RONR))
    assert isinstance(acts[0], engine.Broadcast)
    assert tables.fib_lookup(s, BASE.child("b"), 421) is None


def test_receive_malformed_and_overheard():
    s = fresh()
    pkt, acts = engine.receive_frame(s, "n1", b"\x07junk", None, 0, VIF)
    assert pkt is None and acts[0].reason == "malformed"
    from ndniot.wire import encode
    pkt, acts = engine.receive_frame(s, "n1", encode(Interest(A, 1)), "other", 0, VIF)
    assert acts[0].reason == "overheard"
