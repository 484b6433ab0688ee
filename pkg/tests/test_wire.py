import pytest
from hypothesis import given, strategies as st

from ndniot.wire import (
    MTU, Data, EmptyComponent, IllegalByte, Interest, Kind, MalformedFrame, MtuExceeded, Name,
    OversizeName, Packet, UnknownKind, chunk_index, chunk_name, chunk_suffix, decode, encode,
    is_prefix, parent_prefix, parse_name,
)


def test_default_interest_bytes():
    # hand-assembled: kind, flags, nonce, hops, two zero lengths, 7 reserved, name length, name
    expected = (bytes([1, 0, 1, 2, 3, 4, 0, 0, 0]) + bytes(7) + bytes([12]) + b"/riot/text/a")
    frame = encode(Interest("/riot/text/a", 0x01020304))
    assert frame == expected
    assert len(frame) == 29


def test_default_data_bytes():
    payload = bytes(range(30))
    expected = bytes([2, 0, 0, 0, 0, 0, 0, 12, 30]) + bytes(7) + b"/riot/text/a" + payload
    frame = encode(Data("/riot/text/a", payload))
    assert frame == expected
    assert len(frame) == 58


def test_parse_and_format():
    n = parse_name("/riot/text/a")
    assert n.components == (b"riot", b"text", b"a")
    assert str(n) == "/riot/text/a"
    with pytest.raises(MalformedFrame):
        parse_name("riot/text")


@pytest.mark.parametrize("text,exc", [
    ("/riot//a", EmptyComponent),
    ("/", EmptyComponent),
    ("/" + "x" * 33, OversizeName),
    ("/" + "/".join(["abcdefghij"] * 5), OversizeName),
])
def test_bad_names(text, exc):
    with pytest.raises(exc):
        parse_name(text)


def test_nul_byte_rejected():
    with pytest.raises(IllegalByte):
        Name((b"ri\x00ot",))


def test_prefix_helpers():
    a = parse_name("/riot/text/a")
    assert parent_prefix(a) == parse_name("/riot/text")
    assert is_prefix(parse_name("/riot"), a)
    assert not is_prefix(parse_name("/riot/textx"), a)
    assert not is_prefix(a, parse_name("/riot"))


def test_chunk_suffixes():
    assert [chunk_suffix(i) for i in (0, 1, 25, 26, 27, 51, 52, 701, 702)] == \
        ["a", "b", "z", "aa", "ab", "az", "ba", "zz", "aaa"]
    assert str(chunk_name(parse_name("/riot/text"), 2)) == "/riot/text/c"
    for i in range(800):
        assert chunk_index(chunk_suffix(i)) == i


def test_oversize_frame():
    name = parse_name("/riot/text/a")
    with pytest.raises(MtuExceeded):
        encode(Data(name, bytes(MTU - 16 - len(name.encoded) + 1)))
    with pytest.raises(MtuExceeded):
        decode(bytes(65))


@pytest.mark.parametrize("frame,exc", [
    (b"\x01\x00", MalformedFrame),
    (bytes([9]) + bytes(15) + b"\x02/a", UnknownKind),
    (bytes([1]) + bytes(15) + b"\x05/a", MalformedFrame),
    (bytes([2, 0, 0, 0, 0, 0, 0, 2, 5]) + bytes(7) + b"/a", MalformedFrame),
    (bytes([2, 0, 0, 0, 0, 1, 0, 2, 0]) + bytes(7) + b"/a", MalformedFrame),
    (bytes([1, 0, 0, 0, 0, 0, 0, 0, 0, 1]) + bytes(6) + b"\x02/a", MalformedFrame),
    (bytes([1]) + bytes(15) + b"\x02//", MalformedFrame),
])
def test_malformed(frame, exc):
    with pytest.raises(exc):
        decode(frame)


def test_packet_validation():
    with pytest.raises(MalformedFrame):
        Packet(Kind.INTEREST, parse_name("/a"), payload=b"x")
    with pytest.raises(MalformedFrame):
        Packet(Kind.DATA, parse_name("/a"), nonce=3)
    assert Interest("/a", 1, hop_count=255).forwarded().hop_count == 255


component = st.binary(min_size=1, max_size=8).filter(lambda b: b"/" not in b and b"\x00" not in b)


@st.composite
def packets(draw):
    comps = draw(st.lists(component, min_size=1, max_size=4))
    name = Name(tuple(comps))
    flags = draw(st.integers(0, 255))
    hops = draw(st.integers(0, 255))
    if draw(st.booleans()):
        return Interest(name, draw(st.integers(0, 2**32 - 1)), flags=flags, hop_count=hops)
    room = MTU - 16 - len(name.encoded)
    return Data(name, draw(st.binary(max_size=room)), flags=flags, hop_count=hops)


@given(packets())
def test_round_trip(pkt):
    frame = encode(pkt)
    assert len(frame) <= MTU
    assert decode(frame) == pkt


@given(packets(), st.integers(0, 63), st.integers(0, 255))
def test_corruption_never_crashes(pkt, pos, value):
    frame = bytearray(encode(pkt))
    frame[pos % len(frame)] = value
    try:
        decode(bytes(frame))
    except (MalformedFrame, UnknownKind):
        pass
