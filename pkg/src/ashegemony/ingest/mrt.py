"""Streaming reader for MRT routing table dumps (RFC 6396).

Only TABLE_DUMP_V2 unicast RIBs are decoded fully; legacy TABLE_DUMP records
get a best-effort adapter. Everything else is skipped and counted.
"""

from __future__ import annotations

import bz2
import gzip
import io
import logging
import socket
import struct
from typing import BinaryIO, Iterator, List, Optional

from .stats import ParseStats
from .types import Prefix, RawPath, RibEntry, ViewpointId

log = logging.getLogger(__name__)

TABLE_DUMP = 12
TABLE_DUMP_V2 = 13

PEER_INDEX_TABLE = 1
RIB_IPV4_UNICAST = 2
RIB_IPV6_UNICAST = 4

ATTR_AS_PATH = 2
ATTR_AS4_PATH = 17

SEG_AS_SET = 1
SEG_AS_SEQUENCE = 2
SEG_CONFED_SEQUENCE = 3
SEG_CONFED_SET = 4

GZIP_MAGIC = b"\x1f\x8b"
BZ2_MAGIC = b"BZh"

_HEADER = struct.Struct(">IHHI")


class MrtParseError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class _BadRecord(Exception):
    pass


def open_input(path) -> BinaryIO:
    """Open a file, transparently decompressing gzip or bzip2 by magic bytes."""
    return decompress_stream(open(path, "rb"))


def decompress_stream(stream: BinaryIO) -> BinaryIO:
    if stream.seekable():
        pos = stream.tell()
        magic = stream.read(3)
        stream.seek(pos)
    elif hasattr(stream, "peek"):
        magic = stream.peek(3)[:3]
    else:
        stream = io.BytesIO(stream.read())
        magic = stream.getvalue()[:3]
    if magic.startswith(GZIP_MAGIC):
        return gzip.GzipFile(fileobj=stream)
    if magic.startswith(BZ2_MAGIC):
        return bz2.BZ2File(stream)
    return stream


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = []
    while n > 0:
        chunk = stream.read(n)
        if not chunk:
            break
        chunks.append(chunk)
        n -= len(chunk)
    return b"".join(chunks)


def _ip(raw: bytes) -> str:
    return socket.inet_ntop(socket.AF_INET if len(raw) == 4 else socket.AF_INET6, raw)


def _parse_segments(data: bytes, asn_size: int) -> List[tuple]:
    segments = []
    pos = 0
    fmt = ">I" if asn_size == 4 else ">H"
    while pos < len(data):
        if pos + 2 > len(data):
            raise _BadRecord("truncated AS path segment")
        seg_type, count = data[pos], data[pos + 1]
        pos += 2
        end = pos + count * asn_size
        if end > len(data):
            raise _BadRecord("truncated AS path segment")
        asns = [struct.unpack_from(fmt, data, pos + i * asn_size)[0] for i in range(count)]
        pos = end
        segments.append((seg_type, asns))
    return segments


def _flatten(segments) -> List:
    out: list = []
    for seg_type, asns in segments:
        if seg_type in (SEG_AS_SEQUENCE, SEG_CONFED_SEQUENCE):
            out.extend(asns)
        elif seg_type in (SEG_AS_SET, SEG_CONFED_SET):
            out.append(frozenset(asns))
        else:
            raise _BadRecord(f"unknown AS path segment type {seg_type}")
    return out


def _merge_as4(as_path: List, as4_path: List) -> List:
    # RFC 6793: AS4_PATH replaces the trailing part of AS_PATH it covers.
    if len(as_path) < len(as4_path):
        return as_path
    return as_path[:len(as_path) - len(as4_path)] + as4_path


def _parse_attributes(data: bytes, asn_size: int) -> RawPath:
    pos = 0
    as_path = None
    as4_path = None
    while pos < len(data):
        if pos + 3 > len(data):
            raise _BadRecord("truncated attribute header")
        flags, type_code = data[pos], data[pos + 1]
        if flags & 0x10:
            if pos + 4 > len(data):
                raise _BadRecord("truncated attribute header")
            length = struct.unpack_from(">H", data, pos + 2)[0]
            pos += 4
        else:
            length = data[pos + 2]
            pos += 3
        if pos + length > len(data):
            raise _BadRecord("truncated attribute")
        value = data[pos:pos + length]
        pos += length
        if type_code == ATTR_AS_PATH:
            as_path = _flatten(_parse_segments(value, asn_size))
        elif type_code == ATTR_AS4_PATH:
            as4_path = _flatten(_parse_segments(value, 4))
    if as_path is None:
        return ()
    if as4_path is not None:
        as_path = _merge_as4(as_path, as4_path)
    return tuple(as_path)


def _parse_peer_index(body: bytes):
    # collector BGP id (4), view name length (2), view name, peer count (2)
    view_len = struct.unpack_from(">H", body, 4)[0]
    pos = 6 + view_len
    view_name = body[6:pos].decode("utf-8", "replace")
    (count,) = struct.unpack_from(">H", body, pos)
    pos += 2
    peers = []
    for _ in range(count):
        peer_type = body[pos]
        pos += 5  # type + peer BGP id
        ip_len = 16 if peer_type & 0x01 else 4
        ip = _ip(body[pos:pos + ip_len])
        pos += ip_len
        if peer_type & 0x02:
            (asn,) = struct.unpack_from(">I", body, pos)
            pos += 4
        else:
            (asn,) = struct.unpack_from(">H", body, pos)
            pos += 2
        peers.append((ip, asn))
    if pos > len(body):
        raise _BadRecord("truncated peer index table")
    return view_name, peers


def parse_mrt(stream: BinaryIO, collector: str = "",
              stats: Optional[ParseStats] = None) -> Iterator[RibEntry]:
    """Yield one RibEntry per (prefix, peer) RIB row.

    A truncated record header is fatal (MrtParseError carries the offset); a
    record whose body is short or undecodable is skipped and counted in
    ``stats.skipped_records``.
    """
    if stats is None:
        stats = ParseStats()
    stream = decompress_stream(stream)
    offset = 0
    peers: Optional[List[ViewpointId]] = None
    while True:
        header = _read_exact(stream, _HEADER.size)
        if not header:
            return
        if len(header) < _HEADER.size:
            raise MrtParseError("truncated MRT header", offset)
        ts, mrt_type, subtype, length = _HEADER.unpack(header)
        body = _read_exact(stream, length)
        record_offset = offset
        offset += _HEADER.size + len(body)
        stats.records += 1
        if len(body) < length:
            stats.skipped_records += 1
            log.warning("truncated MRT record at byte offset %d", record_offset)
            return
        try:
            if mrt_type == TABLE_DUMP_V2 and subtype == PEER_INDEX_TABLE:
                view_name, raw_peers = _parse_peer_index(body)
                name = collector or view_name
                peers = [ViewpointId(name, ip, asn) for ip, asn in raw_peers]
            elif mrt_type == TABLE_DUMP_V2 and subtype in (RIB_IPV4_UNICAST, RIB_IPV6_UNICAST):
                if peers is None:
                    raise _BadRecord("RIB record before PEER_INDEX_TABLE")
                yield from _rib_entries(body, subtype, ts, peers, stats)
            elif mrt_type == TABLE_DUMP and subtype in (1, 2):
                entry = _table_dump_v1(body, subtype, ts, collector)
                if entry is not None:
                    stats.entries += 1
                    yield entry
            else:
                stats.unknown_types += 1
        except (_BadRecord, struct.error, IndexError, ValueError, OSError) as exc:
            stats.skipped_records += 1
            log.warning("skipping MRT record at byte offset %d: %s", record_offset, exc)


def _rib_entries(body: bytes, subtype: int, ts: int, peers, stats: ParseStats) -> List[RibEntry]:
    family, bits = (4, 32) if subtype == RIB_IPV4_UNICAST else (6, 128)
    plen = body[4]
    if plen > bits:
        raise _BadRecord(f"prefix length {plen}")
    nbytes = (plen + 7) // 8
    raw = body[5:5 + nbytes]
    if len(raw) < nbytes:
        raise _BadRecord("truncated prefix")
    network = int.from_bytes(raw.ljust(bits // 8, b"\0"), "big")
    network &= ~((1 << (bits - plen)) - 1) & ((1 << bits) - 1)
    prefix = Prefix(family, network, plen)
    pos = 5 + nbytes
    (count,) = struct.unpack_from(">H", body, pos)
    pos += 2
    # Decode the whole record before yielding so a corrupt record yields nothing.
    out = []
    for _ in range(count):
        peer_index, _originated, attr_len = struct.unpack_from(">HIH", body, pos)
        pos += 8
        attrs = body[pos:pos + attr_len]
        if len(attrs) < attr_len:
            raise _BadRecord("truncated RIB entry")
        pos += attr_len
        if peer_index >= len(peers):
            stats.unknown_peer += 1
            continue
        path = _parse_attributes(attrs, 4)
        out.append(RibEntry(peers[peer_index], prefix, path, ts))
    if family == 6 and plen > 64:
        stats.long_ipv6 += len(out)
    stats.entries += len(out)
    return out


def _table_dump_v1(body: bytes, subtype: int, ts: int, collector: str) -> Optional[RibEntry]:
    family, alen = (4, 4) if subtype == 1 else (6, 16)
    pos = 4
    network = int.from_bytes(body[pos:pos + alen], "big")
    pos += alen
    plen = body[pos]
    pos += 6  # length, status, originated time
    peer_ip = _ip(body[pos:pos + alen])
    pos += alen
    peer_as, attr_len = struct.unpack_from(">HH", body, pos)
    pos += 4
    attrs = body[pos:pos + attr_len]
    if len(attrs) < attr_len:
        raise _BadRecord("truncated TABLE_DUMP entry")
    path = _parse_attributes(attrs, 2)
    prefix = Prefix(family, network, plen)
    return RibEntry(ViewpointId(collector, peer_ip, peer_as), prefix, path, ts)
