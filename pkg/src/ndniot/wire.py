"""Names, packets and the 64-byte frame codec.

Frame layout (all multi-byte fields big-endian)::

    offset  size  field
    0       1     kind (1 = Interest, 2 = Data)
    1       1     flags
    2       4     nonce (zero for Data)
    6       1     hop count
    7       1     name length   (Data only, zero for Interest)
    8       1     payload length (Data only, zero for Interest)
    9       7     reserved, zero

    Interest body: name length (1 byte) | name
    Data body:     name | payload

The Data body carries its lengths inside the fixed header so the default
chunk (/riot/text/a with 30 bytes of content) is exactly 58 bytes on air,
while an Interest for the same name is 29 bytes.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

MTU = 64
HEADER_LEN = 16
MAX_NAME_LEN = MTU - HEADER_LEN - 1
MAX_COMPONENT_LEN = 32

_HEADER = struct.Struct(">BBIBBB7x")
assert _HEADER.size == HEADER_LEN


class WireError(ValueError):
    """Base class for name and frame errors."""


class EmptyComponent(WireError):
    pass


class OversizeName(WireError):
    pass


class IllegalByte(WireError):
    pass


class RootName(WireError):
    pass


class MtuExceeded(WireError):
    pass


class MalformedFrame(WireError):
    pass


class UnknownKind(WireError):
    pass


@dataclass(frozen=True, order=True)
class Name:
    """Hierarchical content name, e.g. ``/riot/text/a``."""

    components: tuple[bytes, ...]

    def __post_init__(self):
        comps = tuple(bytes(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise EmptyComponent("a name needs at least one component")
        for c in comps:
            if not c:
                raise EmptyComponent("empty name component")
            if len(c) > MAX_COMPONENT_LEN:
                raise OversizeName(f"component longer than {MAX_COMPONENT_LEN} bytes")
            if b"/" in c or b"\x00" in c:
                raise IllegalByte(f"illegal byte in component {c!r}")
        if len(self.encoded) > MAX_NAME_LEN:
            raise OversizeName(f"encoded name is {len(self.encoded)} bytes, max {MAX_NAME_LEN}")

    @property
    def encoded(self) -> bytes:
        return b"".join(b"/" + c for c in self.components)

    def __len__(self):
        return len(self.components)

    def __str__(self):
        return self.encoded.decode("ascii", errors="backslashreplace")

    def __repr__(self):
        return f"Name({str(self)!r})"

    def child(self, component: bytes | str) -> "Name":
        if isinstance(component, str):
            component = component.encode("ascii")
        return Name(self.components + (component,))


def parse_name(text: str | bytes) -> Name:
    if isinstance(text, str):
        try:
            text = text.encode("ascii")
        except UnicodeEncodeError as exc:
            raise IllegalByte(f"non-ASCII name {text!r}") from exc
    if not text.startswith(b"/"):
        raise MalformedFrame(f"name must start with '/': {text!r}")
    if len(text) > MAX_NAME_LEN:
        raise OversizeName(f"encoded name is {len(text)} bytes, max {MAX_NAME_LEN}")
    return Name(tuple(text[1:].split(b"/")))


def format_name(name: Name) -> str:
    return str(name)


def is_prefix(prefix: Name, name: Name) -> bool:
    n = len(prefix.components)
    return n <= len(name.components) and name.components[:n] == prefix.components


def parent_prefix(name: Name) -> Name:
    if len(name.components) < 2:
        raise RootName(f"{name} has no parent prefix")
    return Name(name.components[:-1])


class Kind(enum.IntEnum):
    INTEREST = 1
    DATA = 2


@dataclass(frozen=True)
class Packet:
    kind: Kind
    name: Name
    nonce: int = 0
    payload: bytes = b""
    flags: int = 0
    hop_count: int = 0

    def __post_init__(self):
        if self.kind == Kind.INTEREST and self.payload:
            raise MalformedFrame("Interests carry no payload")
        if self.kind == Kind.DATA and self.nonce:
            raise MalformedFrame("Data carries a zero nonce")
        if not 0 <= self.nonce < 2**32:
            raise MalformedFrame("nonce out of range")
        if not (0 <= self.flags < 256 and 0 <= self.hop_count < 256):
            raise MalformedFrame("flags/hop count out of range")

    @property
    def is_interest(self) -> bool:
        return self.kind == Kind.INTEREST

    @property
    def is_data(self) -> bool:
        return self.kind == Kind.DATA

    def forwarded(self) -> "Packet":
        """Copy with the hop count bumped (saturating)."""
        return Packet(self.kind, self.name, self.nonce, self.payload, self.flags,
                      min(self.hop_count + 1, 255))


def Interest(name: Name | str, nonce: int, **kw) -> Packet:
    if isinstance(name, str):
        name = parse_name(name)
    return Packet(Kind.INTEREST, name, nonce=nonce, **kw)


def Data(name: Name | str, payload: bytes, **kw) -> Packet:
    if isinstance(name, str):
        name = parse_name(name)
    return Packet(Kind.DATA, name, payload=bytes(payload), **kw)


def frame_length(p: Packet) -> int:
    if p.kind == Kind.INTEREST:
        return HEADER_LEN + 1 + len(p.name.encoded)
    return HEADER_LEN + len(p.name.encoded) + len(p.payload)


def max_payload(name: Name) -> int:
    return MTU - HEADER_LEN - len(name.encoded)


def encode(p: Packet) -> bytes:
    size = frame_length(p)
    if size > MTU:
        raise MtuExceeded(f"{size}-byte frame exceeds the {MTU}-byte MTU")
    name = p.name.encoded
    if p.kind == Kind.INTEREST:
        return _HEADER.pack(p.kind, p.flags, p.nonce, p.hop_count, 0, 0) + bytes([len(name)]) + name
    if p.kind == Kind.DATA:
        return _HEADER.pack(p.kind, p.flags, 0, p.hop_count, len(name), len(p.payload)) + name + p.payload
    raise UnknownKind(p.kind)


def decode(b: bytes) -> Packet:
    b = bytes(b)
    if len(b) > MTU:
        raise MtuExceeded(f"{len(b)}-byte frame exceeds the {MTU}-byte MTU")
    if len(b) < HEADER_LEN:
        raise MalformedFrame("truncated header")
    kind, flags, nonce, hops, name_len, payload_len = _HEADER.unpack_from(b)
    if any(b[9:HEADER_LEN]):
        raise MalformedFrame("reserved header bytes must be zero")
    body = b[HEADER_LEN:]
    if kind == Kind.INTEREST:
        if name_len or payload_len:
            raise MalformedFrame("length fields are zero in an Interest header")
        if not body or body[0] != len(body) - 1:
            raise MalformedFrame("bad Interest name length")
        raw_name = body[1:]
        payload = b""
    elif kind == Kind.DATA:
        if nonce:
            raise MalformedFrame("Data with non-zero nonce")
        if name_len + payload_len != len(body):
            raise MalformedFrame("Data length fields disagree with frame size")
        raw_name, payload = body[:name_len], body[name_len:]
    else:
        raise UnknownKind(f"unknown packet kind {kind}")
    try:
        name = parse_name(raw_name)
    except WireError as exc:
        raise MalformedFrame(f"bad name: {exc}") from exc
    return Packet(Kind(kind), name, nonce=nonce, payload=payload, flags=flags, hop_count=hops)


def chunk_suffix(index: int) -> str:
    """0 -> 'a', 25 -> 'z', 26 -> 'aa', 27 -> 'ab', ..."""
    if index < 0:
        raise ValueError("chunk index must be non-negative")
    out = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        out = chr(ord("a") + rem) + out
    return out


def chunk_name(base: Name, index: int) -> Name:
    return base.child(chunk_suffix(index))


def chunk_index(suffix: bytes | str) -> int:
    """Inverse of chunk_suffix; raises ValueError for non-chunk components."""
    if isinstance(suffix, bytes):
        suffix = suffix.decode("ascii", errors="replace")
    if not suffix or not all("a" <= ch <= "z" for ch in suffix):
        raise ValueError(f"not a chunk suffix: {suffix!r}")
    index = 0
    for ch in suffix:
        index = index * 26 + (ord(ch) - ord("a") + 1)
    return index - 1
