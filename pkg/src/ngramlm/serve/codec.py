"""Binary wire protocol: length-prefixed frames.

Frame layout is a little-endian u32 payload length (message type
included), one u8 message type, then the payload of fixed-width
little-endian u32 word ids and raw f64 floats. Floats travel as their
exact bit patterns, so distributed lookups reproduce local arithmetic
bit for bit.
"""

from __future__ import annotations

import struct

from ..errors import ParseError

PROTOCOL_VERSION = 1

MSG_HELLO = 1
MSG_HELLO_OK = 2
MSG_GET = 3
MSG_ENTRIES = 4
MSG_HEALTH = 5
MSG_HEALTH_OK = 6
MSG_ERROR = 7

_LEN = struct.Struct("<I")
_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = struct.Struct("<d")
_ENTRY = struct.Struct("<Bdd")

Entry = tuple[float, float | None]


def pack_frame(msg_type: int, payload: bytes = b"") -> bytes:
    return _LEN.pack(1 + len(payload)) + _U8.pack(msg_type) + payload


def split_frame(frame: bytes) -> tuple[int, bytes]:
    return frame[0], frame[1:]


def encode_hello() -> bytes:
    return pack_frame(MSG_HELLO, _U8.pack(PROTOCOL_VERSION))


def encode_hello_ok(entry_count: int) -> bytes:
    return pack_frame(MSG_HELLO_OK, _U8.pack(PROTOCOL_VERSION) + _U64.pack(entry_count))


def encode_health_ok(entry_count: int) -> bytes:
    return pack_frame(MSG_HEALTH_OK, _U64.pack(entry_count))


def decode_u64(payload: bytes) -> int:
    return _U64.unpack(payload[:8])[0]


def encode_error(message: str) -> bytes:
    return pack_frame(MSG_ERROR, message.encode("utf-8"))


def encode_ngrams(ngrams: list[tuple[int, ...]]) -> bytes:
    parts = [_U32.pack(len(ngrams))]
    for g in ngrams:
        parts.append(_U8.pack(len(g)))
        for wid in g:
            parts.append(_U32.pack(wid))
    return pack_frame(MSG_GET, b"".join(parts))


def decode_ngrams(payload: bytes) -> list[tuple[int, ...]]:
    (count,) = _U32.unpack_from(payload, 0)
    pos = 4
    out: list[tuple[int, ...]] = []
    for _ in range(count):
        (k,) = _U8.unpack_from(payload, pos)
        pos += 1
        ids = struct.unpack_from(f"<{k}I", payload, pos)
        pos += 4 * k
        out.append(ids)
    if pos != len(payload):
        raise ParseError("trailing bytes in lookup request")
    return out


_FOUND = 1
_HAS_BOW = 2


def encode_entries(entries: list[Entry | None]) -> bytes:
    parts = [_U32.pack(len(entries))]
    for e in entries:
        if e is None:
            parts.append(_ENTRY.pack(0, 0.0, 0.0))
        else:
            lp, bow = e
            flags = _FOUND | (_HAS_BOW if bow is not None else 0)
            parts.append(_ENTRY.pack(flags, lp, 0.0 if bow is None else bow))
    return pack_frame(MSG_ENTRIES, b"".join(parts))


def decode_entries(payload: bytes) -> list[Entry | None]:
    (count,) = _U32.unpack_from(payload, 0)
    pos = 4
    out: list[Entry | None] = []
    for _ in range(count):
        flags, lp, bow = _ENTRY.unpack_from(payload, pos)
        pos += _ENTRY.size
        if flags & _FOUND:
            out.append((lp, bow if flags & _HAS_BOW else None))
        else:
            out.append(None)
    if pos != len(payload):
        raise ParseError("trailing bytes in lookup response")
    return out


def read_exact(sock, nbytes: int) -> bytes:
    """Read exactly nbytes from a socket; b'' means clean EOF at a
    frame boundary, anything shorter mid-frame raises ConnectionError."""
    chunks = []
    got = 0
    while got < nbytes:
        chunk = sock.recv(nbytes - got)
        if not chunk:
            if got == 0:
                return b""
            raise ConnectionError("connection closed mid-frame")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_frame(sock) -> tuple[int, bytes] | None:
    """Read one frame; None on clean EOF."""
    head = read_exact(sock, _LEN.size)
    if not head:
        return None
    (length,) = _LEN.unpack(head)
    body = read_exact(sock, length)
    if len(body) != length:
        raise ConnectionError("connection closed mid-frame")
    return body[0], body[1:]
