"""AS path normalization and full-feed classification."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping

from .types import CleanPath, RawPath, Viewpoint, ViewpointId

AS_SET = "as_set"
LOOP = "loop"
RESERVED_ASN = "reserved_asn"
EMPTY = "empty"

AS_SET_POLICIES = ("reject", "truncate")


class PathRejected(ValueError):
    def __init__(self, reason: str, path=None):
        super().__init__(reason)
        self.reason = reason
        self.path = path


def is_reserved_asn(asn: int) -> bool:
    return (
        asn == 0
        or asn == 23456
        or 64512 <= asn <= 65534
        or 4200000000 <= asn <= 4294967294
    )


def normalize_path(path: RawPath, as_set_policy: str = "reject",
                   filter_reserved: bool = True) -> CleanPath:
    """Collapse prepending and validate a raw path.

    Raises PathRejected with one of the reason codes ``as_set``, ``loop``,
    ``reserved_asn`` or ``empty``. With ``as_set_policy="truncate"`` the path
    is cut just before its first AS-set instead of being rejected.
    """
    asns = []
    seen = set()
    last = None
    for seg in path:
        if not isinstance(seg, int):
            if as_set_policy == "truncate":
                break
            raise PathRejected(AS_SET, path)
        if seg == last:
            continue
        if seg in seen:
            raise PathRejected(LOOP, path)
        if filter_reserved and is_reserved_asn(seg):
            raise PathRejected(RESERVED_ASN, path)
        seen.add(seg)
        asns.append(seg)
        last = seg
    if not asns:
        raise PathRejected(EMPTY, path)
    return CleanPath(tuple(asns))


def classify_full_feed(route_counts: Mapping[ViewpointId, int], family: int,
                       fraction: float = 0.75) -> Dict[ViewpointId, Viewpoint]:
    """Flag peers whose route count reaches ``fraction`` of the family maximum."""
    if not route_counts:
        return {}
    threshold = Fraction(str(fraction)) * max(route_counts.values())
    return {
        vid: Viewpoint(vid, family, count, count >= threshold)
        for vid, count in route_counts.items()
    }
