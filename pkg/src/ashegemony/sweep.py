"""Local-graph hegemony for every origin AS in one pass over a snapshot."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .core import HegemonyConfig, HegemonyScore, PerViewpointBC, aggregate, prepare_table
from .table import RibTable
from .weighting import build_trie

log = logging.getLogger(__name__)

DEFAULT_MAX_CELLS = 50_000_000


class _ShardOverflow(Exception):
    pass


def _accumulate(table: RibTable, weighted: bool, origin_range: Optional[Tuple[int, int]],
                max_cells: Optional[int], wanted: Optional[set]):
    # origin -> viewpoint -> [total, sigma]
    acc: Dict[int, Dict] = {}
    cells = 0
    for vid, routes in table.items():
        trie = build_trie(routes) if weighted else None
        for prefix, path in routes.items():
            asns = path.asns
            origin = asns[-1]
            if origin_range is not None and not origin_range[0] <= origin <= origin_range[1]:
                continue
            if wanted is not None and origin not in wanted:
                continue
            w = trie.nodes[prefix].exclusive_count if weighted else 1
            if not w:
                continue
            per_vp = acc.get(origin)
            if per_vp is None:
                per_vp = acc[origin] = {}
            slot = per_vp.get(vid)
            if slot is None:
                slot = per_vp[vid] = [0, {}]
                cells += 1
            slot[0] += w
            sigma = slot[1]
            for asn in asns:
                if asn in sigma:
                    sigma[asn] += w
                else:
                    sigma[asn] = w
                    cells += 1
            if max_cells is not None and cells > max_cells:
                raise _ShardOverflow
    return acc


def _shards(origins: List[int], count: int) -> List[Tuple[int, int]]:
    size = -(-len(origins) // count)
    return [(origins[i], origins[min(i + size, len(origins)) - 1])
            for i in range(0, len(origins), size)]


def sweep(entries, config: HegemonyConfig = HegemonyConfig(),
          max_cells: Optional[int] = DEFAULT_MAX_CELLS,
          origins: Optional[Iterable[int]] = None) -> Dict[int, Dict[int, HegemonyScore]]:
    """Per-origin hegemony for all origins (or only ``origins``).

    Equivalent to calling ``hegemony(entries, GraphScope.local(o), config)``
    for each origin. When the accumulator would hold more than ``max_cells``
    (viewpoint, AS) sums, the origins are split into ASN ranges and the table
    is swept once per range.
    """
    table = prepare_table(entries, config)
    weighted = config.use_weights
    wanted = set(origins) if origins is not None else None
    all_origins = sorted(table.origins() if wanted is None else wanted & table.origins())
    results: Dict[int, Dict[int, HegemonyScore]] = {}
    shards = 1
    while True:
        ranges = [None] if shards == 1 else _shards(all_origins, shards)
        try:
            for origin_range in ranges:
                acc = _accumulate(table, weighted, origin_range, max_cells, wanted)
                for origin in sorted(acc):
                    bcs = [PerViewpointBC(vid, sigma, total)
                           for vid, (total, sigma) in acc[origin].items()]
                    results[origin] = aggregate(bcs, config.alpha, config.min_viewpoints)
                del acc
            return dict(sorted(results.items()))
        except _ShardOverflow:
            if shards >= len(all_origins):
                log.warning("single-origin shard exceeds %s cells; sweeping unbounded", max_cells)
                max_cells = None
                continue
            shards = min(shards * 2, len(all_origins))
            results.clear()
            log.info("local sweep accumulator over %s cells, retrying with %d origin shards",
                     max_cells, shards)


@dataclass(frozen=True)
class LocalSummary:
    origin: int
    n_nodes: int
    n_zero: int
    n_above: int


def summarize_local(results: Dict[int, Dict[int, HegemonyScore]],
                    threshold: float = 0.01) -> Dict[int, LocalSummary]:
    """Count, per origin, the other ASes of its local graph by hegemony level."""
    out = {}
    for origin, scores in results.items():
        others = [s.hegemony for asn, s in scores.items() if asn != origin]
        out[origin] = LocalSummary(
            origin,
            len(others),
            sum(1 for h in others if h == 0),
            sum(1 for h in others if h > threshold),
        )
    return out
