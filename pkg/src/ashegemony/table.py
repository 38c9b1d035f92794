"""Normalized routes per viewpoint, with the accounting needed for manifests."""

from __future__ import annotations

from collections import Counter
from typing import Dict, Iterable, Iterator, Optional, Tuple

from .ingest.paths import PathRejected, classify_full_feed, normalize_path
from .ingest.types import CleanPath, Prefix, RibEntry, Viewpoint, ViewpointId

DEFAULT_ROUTE = "default_route"
OTHER_FAMILY = "other_family"
SUPERSEDED = "superseded"

Routes = Dict[Prefix, CleanPath]


class RibTable:
    """Best path per (viewpoint, prefix) for one address family.

    ``rejected`` counts every parsed entry that did not end up as a route,
    keyed by reason, so ``parsed == used + sum(rejected.values())``.
    """

    def __init__(self, family: int = 4):
        self.family = family
        self.routes: Dict[ViewpointId, Routes] = {}
        self.parsed = 0
        self.rejected: Counter = Counter()
        self.max_timestamp = 0

    @classmethod
    def from_entries(cls, entries: Iterable[RibEntry], family: int = 4,
                     as_set_policy: str = "reject", filter_reserved: bool = True) -> "RibTable":
        table = cls(family)
        table.extend(entries, as_set_policy, filter_reserved)
        return table

    def extend(self, entries: Iterable[RibEntry], as_set_policy: str = "reject",
               filter_reserved: bool = True) -> None:
        family = self.family
        routes = self.routes
        rejected = self.rejected
        cache: Dict[tuple, object] = {}
        parsed = 0
        max_ts = self.max_timestamp
        for entry in entries:
            parsed += 1
            prefix = entry.prefix
            if prefix.family != family:
                rejected[OTHER_FAMILY] += 1
                continue
            if prefix.length == 0:
                rejected[DEFAULT_ROUTE] += 1
                continue
            clean = cache.get(entry.path)
            if clean is None:
                try:
                    clean = normalize_path(entry.path, as_set_policy, filter_reserved)
                except PathRejected as exc:
                    clean = exc.reason
                cache[entry.path] = clean
            if clean.__class__ is str:
                rejected[clean] += 1
                continue
            vp_routes = routes.get(entry.viewpoint)
            if vp_routes is None:
                vp_routes = routes[entry.viewpoint] = {}
            if prefix in vp_routes:
                # RIBs carry one best path per (peer, prefix): keep the last.
                rejected[SUPERSEDED] += 1
            vp_routes[prefix] = clean
            if entry.timestamp > max_ts:
                max_ts = entry.timestamp
        self.parsed += parsed
        self.max_timestamp = max_ts

    def add_route(self, viewpoint: ViewpointId, prefix: Prefix, path: CleanPath) -> None:
        self.parsed += 1
        vp_routes = self.routes.setdefault(viewpoint, {})
        if prefix in vp_routes:
            self.rejected[SUPERSEDED] += 1
        vp_routes[prefix] = path

    @property
    def used(self) -> int:
        return sum(len(r) for r in self.routes.values())

    def viewpoints(self) -> Iterator[ViewpointId]:
        return iter(sorted(self.routes))

    def items(self) -> Iterator[Tuple[ViewpointId, Routes]]:
        for vid in sorted(self.routes):
            yield vid, self.routes[vid]

    def route_counts(self) -> Dict[ViewpointId, int]:
        return {vid: len(r) for vid, r in self.routes.items()}

    def classify(self, fraction: float = 0.75) -> Dict[ViewpointId, Viewpoint]:
        return classify_full_feed(self.route_counts(), self.family, fraction)

    def restricted(self, keep: Iterable[ViewpointId]) -> "RibTable":
        """A view of this table holding only the given viewpoints."""
        keep = set(keep)
        out = RibTable(self.family)
        out.routes = {vid: r for vid, r in self.routes.items() if vid in keep}
        out.parsed = self.parsed
        out.rejected = Counter(self.rejected)
        out.max_timestamp = self.max_timestamp
        return out

    def full_feed(self, fraction: float = 0.75) -> "RibTable":
        flags = self.classify(fraction)
        return self.restricted(vid for vid, vp in flags.items() if vp.full_feed)

    def origins(self) -> set:
        return {path.origin for r in self.routes.values() for path in r.values()}

    def counters(self) -> dict:
        return {
            "parsed": self.parsed,
            "used": self.used,
            "rejected": dict(sorted(self.rejected.items())),
        }


def as_table(entries, family: Optional[int] = None) -> RibTable:
    if isinstance(entries, RibTable):
        return entries
    return RibTable.from_entries(entries, family if family is not None else 4)
