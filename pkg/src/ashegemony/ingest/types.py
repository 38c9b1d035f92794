"""Record types shared by the parsers and everything downstream."""

from __future__ import annotations

import socket
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Tuple, Union


class ViewpointId(NamedTuple):
    collector: str
    peer_ip: str
    peer_asn: int

    def __str__(self) -> str:
        return f"{self.peer_asn}@{self.collector}/{self.peer_ip}"


class Prefix(NamedTuple):
    """An IP prefix held as integers: family (4 or 6), network bits, length."""

    family: int
    network: int
    length: int

    @property
    def bits(self) -> int:
        return 32 if self.family == 4 else 128

    @property
    def size(self) -> int:
        return 1 << (self.bits - self.length)

    def contains(self, other: "Prefix") -> bool:
        if other.family != self.family or other.length < self.length:
            return False
        shift = self.bits - self.length
        return (other.network >> shift) == (self.network >> shift)

    def __str__(self) -> str:
        return _render_prefix(self.family, self.network, self.length)


@lru_cache(maxsize=1 << 16)
def _render_prefix(family: int, network: int, length: int) -> str:
    if family == 4:
        addr = socket.inet_ntop(socket.AF_INET, network.to_bytes(4, "big"))
    else:
        addr = socket.inet_ntop(socket.AF_INET6, network.to_bytes(16, "big"))
    return f"{addr}/{length}"


class PrefixError(ValueError):
    pass


_prefix_cache: dict = {}


def parse_prefix(text: str) -> Prefix:
    """Parse ``addr/len``; host bits are masked off."""
    hit = _prefix_cache.get(text)
    if hit is not None:
        return hit
    addr, sep, length_s = text.partition("/")
    if not sep or not length_s.isdigit():
        raise PrefixError(f"bad prefix {text!r}")
    length = int(length_s)
    try:
        if ":" in addr:
            family, bits = 6, 128
            raw = socket.inet_pton(socket.AF_INET6, addr)
        else:
            family, bits = 4, 32
            raw = socket.inet_pton(socket.AF_INET, addr)
    except OSError:
        raise PrefixError(f"bad address in {text!r}") from None
    if length > bits:
        raise PrefixError(f"prefix length {length} too long in {text!r}")
    network = int.from_bytes(raw, "big")
    network &= ~((1 << (bits - length)) - 1) & ((1 << bits) - 1)
    prefix = Prefix(family, network, length)
    if len(_prefix_cache) < 1 << 20:
        _prefix_cache[text] = prefix
    return prefix


# A raw path segment is a plain ASN or an AS-set.
Segment = Union[int, frozenset]
RawPath = Tuple[Segment, ...]


class RibEntry(NamedTuple):
    viewpoint: ViewpointId
    prefix: Prefix
    path: RawPath
    timestamp: int


class CleanPath(NamedTuple):
    """Loop-free ASN sequence, viewpoint side first and origin last."""

    asns: Tuple[int, ...]

    @property
    def origin(self) -> int:
        return self.asns[-1]


@dataclass(frozen=True)
class Viewpoint:
    id: ViewpointId
    family: int
    route_count: int
    full_feed: bool
