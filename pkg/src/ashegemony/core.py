"""Per-viewpoint betweenness centrality and its trimmed-mean aggregate.

Path weights are integers (address counts, or 1 per route in unweighted
mode), so every per-viewpoint score is an exact rational ``sigma / S``.
Aggregation keeps it that way: scores are put over a common denominator
before they are sorted and averaged, and the final hegemony value is the
correctly rounded float of the exact trimmed mean.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .ingest.paths import is_reserved_asn
from .ingest.types import ViewpointId
from .table import RibTable, Routes, as_table
from .weighting import PrefixTrie, build_trie

log = logging.getLogger(__name__)


class EmptyResult(ValueError):
    """No viewpoint retained a single path for the requested scope."""


@dataclass(frozen=True)
class GraphScope:
    origin: Optional[int] = None

    def __post_init__(self):
        if self.origin is not None and (self.origin <= 0 or is_reserved_asn(self.origin)):
            raise ValueError(f"local scope origin {self.origin} is not a public ASN")

    @property
    def kind(self) -> str:
        return "global" if self.origin is None else "local"

    @classmethod
    def local(cls, origin: int) -> "GraphScope":
        return cls(origin)

    def __str__(self) -> str:
        return "global" if self.origin is None else f"local:{self.origin}"


GLOBAL = GraphScope()


@dataclass(frozen=True)
class HegemonyConfig:
    alpha: float = 0.1
    weighted: Optional[bool] = None  # None: weighted for IPv4 only
    family: int = 4
    min_viewpoints: int = 10
    full_feed_only: bool = True
    full_feed_fraction: float = 0.75
    as_set_policy: str = "reject"
    filter_reserved: bool = True
    jobs: int = 1

    def __post_init__(self):
        if not 0 <= self.alpha < 0.5:
            raise ValueError(f"alpha must be in [0, 0.5), got {self.alpha}")
        if self.family not in (4, 6):
            raise ValueError(f"family must be 4 or 6, got {self.family}")

    @property
    def use_weights(self) -> bool:
        return self.family == 4 if self.weighted is None else self.weighted


@dataclass
class PerViewpointBC:
    viewpoint: ViewpointId
    sigma: Dict[int, int]
    total_weight: int

    @property
    def empty(self) -> bool:
        return self.total_weight == 0

    def fraction(self, asn: int) -> Fraction:
        return Fraction(self.sigma.get(asn, 0), self.total_weight)

    @property
    def scores(self) -> Dict[int, float]:
        s = self.total_weight
        return {asn: w / s for asn, w in self.sigma.items()}


@dataclass(frozen=True)
class HegemonyScore:
    asn: int
    hegemony: float
    n_viewpoints: int
    n_trimmed: int
    alpha: float
    low_confidence: bool = False


def per_viewpoint_bc(routes: Routes, scope: GraphScope = GLOBAL,
                     trie: Optional[PrefixTrie] = None, weighted: bool = False,
                     viewpoint: Optional[ViewpointId] = None) -> PerViewpointBC:
    """Weighted fraction of one viewpoint's paths that cross each AS.

    Every AS on a path counts, endpoints included. In weighted mode each
    route weighs its exclusive address count taken from ``trie``, which must
    be built over the viewpoint's whole RIB (not just the scope's routes).
    """
    if weighted and trie is None:
        trie = build_trie(routes)
    origin = scope.origin
    sigma: Dict[int, int] = {}
    total = 0
    get = sigma.get
    for prefix, path in routes.items():
        asns = path.asns
        if origin is not None and asns[-1] != origin:
            continue
        w = trie.nodes[prefix].exclusive_count if weighted else 1
        if not w:
            continue
        total += w
        for asn in asns:
            sigma[asn] = get(asn, 0) + w
    return PerViewpointBC(viewpoint, sigma, total)


def trim_count(n: int, alpha: float) -> int:
    """floor(alpha * n), with alpha read as the decimal it was written as."""
    exact = Fraction(Decimal(repr(alpha))) if isinstance(alpha, float) else Fraction(alpha)
    return int(exact * n)


def trim_bounds(n: int, alpha: float) -> Tuple[int, int]:
    lo = trim_count(n, alpha)
    return lo, n - lo


def trimmed_mean(values: Sequence, alpha: float) -> float:
    """Sort, drop floor(alpha*n) values from each end, average the rest.

    Values may be floats, ints or Fractions; the mean is computed exactly and
    rounded once.
    """
    n = len(values)
    if n == 0:
        raise ValueError("trimmed mean of no values")
    if not 0 <= alpha < 0.5:
        raise ValueError(f"alpha must be in [0, 0.5), got {alpha}")
    lo, hi = trim_bounds(n, alpha)
    kept = sorted(Fraction(v) for v in values)[lo:hi]
    return float(sum(kept) / len(kept))


def aggregate(bcs: Iterable[PerViewpointBC], alpha: float, min_viewpoints: int = 10,
              asns: Optional[Iterable[int]] = None) -> Dict[int, HegemonyScore]:
    """Trimmed mean of per-viewpoint scores for every AS seen anywhere.

    A viewpoint that never sees an AS contributes a 0 for it. Empty
    viewpoints are dropped first. Ties in the ascending sort are broken by
    viewpoint id.
    """
    kept = sorted((b for b in bcs if not b.empty), key=lambda b: b.viewpoint)
    n = len(kept)
    if n == 0:
        raise EmptyResult("no viewpoint retained any path")
    lo, hi = trim_bounds(n, alpha)
    m = hi - lo
    low_conf = n < min_viewpoints
    if low_conf:
        log.warning("only %d viewpoints (minimum %d): low-confidence results", n, min_viewpoints)

    denom = math.lcm(*(b.total_weight for b in kept))
    scales = [denom // b.total_weight for b in kept]
    if asns is None:
        seen = set()
        for b in kept:
            seen.update(b.sigma)
        asns = seen
    per_asn: Dict[int, List[Tuple[int, int]]] = {asn: [] for asn in asns}
    for idx, (b, scale) in enumerate(zip(kept, scales)):
        for asn, w in b.sigma.items():
            bucket = per_asn.get(asn)
            if bucket is not None:
                bucket.append((w * scale, idx))

    out: Dict[int, HegemonyScore] = {}
    full = denom * m
    for asn in sorted(per_asn):
        values = per_asn[asn]
        zeros = n - len(values)
        # Sorted order is `zeros` zero scores followed by the sorted values.
        start = max(lo - zeros, 0)
        stop = hi - zeros
        if stop > 0:
            values.sort()
            total = sum(v for v, _ in values[start:stop])
        else:
            total = 0
        out[asn] = HegemonyScore(asn, total / full, n, m, alpha, low_conf)
    return out


def _bc_task(args) -> PerViewpointBC:
    vid, routes, origin, weighted = args
    trie = build_trie(routes) if weighted else None
    return per_viewpoint_bc(routes, GraphScope(origin), trie, weighted, vid)


def viewpoint_bcs(table: RibTable, scope: GraphScope, weighted: bool,
                  jobs: int = 1) -> List[PerViewpointBC]:
    tasks = [(vid, routes, scope.origin, weighted) for vid, routes in table.items()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bc_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_bc_task(t) for t in tasks]


def prepare_table(entries, config: HegemonyConfig) -> RibTable:
    if isinstance(entries, RibTable):
        table = entries
    else:
        table = RibTable.from_entries(entries, config.family, config.as_set_policy,
                                      config.filter_reserved)
    if config.full_feed_only:
        table = table.full_feed(config.full_feed_fraction)
    return table


def hegemony(entries, scope: GraphScope = GLOBAL,
             config: HegemonyConfig = HegemonyConfig()) -> Dict[int, HegemonyScore]:
    """AS hegemony of every AS in the scope's graph.

    ``entries`` is a RibTable or an iterable of RibEntry. For a local scope
    the origin itself is part of the result (always 1); reports leave it out.
    """
    table = prepare_table(entries, config)
    bcs = viewpoint_bcs(table, scope, config.use_weights, config.jobs)
    return aggregate(bcs, config.alpha, config.min_viewpoints)


def graph_stats(entries, scope: GraphScope = GLOBAL) -> Tuple[int, int]:
    """Distinct ASNs and distinct undirected adjacencies on the scope's paths."""
    table = as_table(entries)
    nodes = set()
    edges = set()
    origin = scope.origin
    seen_paths = set()
    for routes in table.routes.values():
        for path in routes.values():
            asns = path.asns
            if origin is not None and asns[-1] != origin:
                continue
            if asns in seen_paths:
                continue
            seen_paths.add(asns)
            nodes.update(asns)
            for a, b in zip(asns, asns[1:]):
                edges.add((a, b) if a < b else (b, a))
    return len(nodes), len(edges)


def ranked(scores: Dict[int, HegemonyScore], scope: GraphScope = GLOBAL) -> List[HegemonyScore]:
    """Scores ordered by hegemony descending then ASN, origin omitted for local scope."""
    rows = [s for asn, s in scores.items() if asn != scope.origin]
    rows.sort(key=lambda s: (-s.hegemony, s.asn))
    return rows
