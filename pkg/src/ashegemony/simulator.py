"""Toy AS topologies, an all-sources BC oracle, and the viewpoint-subsampling
robustness experiment.

Routing on toy graphs is shortest path by hop count with ties broken by the
lexicographically smallest ASN sequence. A path counts for every AS on it,
endpoints included, exactly as in the RIB-based computation.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import PerViewpointBC, aggregate, per_viewpoint_bc
from .ingest.types import CleanPath, Prefix, ViewpointId
from .table import RibTable
from .weighting import build_trie

log = logging.getLogger(__name__)

DEFAULT_BINS = 50
DEFAULT_EPSILON = 1e-9


@dataclass(frozen=True)
class ToyTopology:
    nodes: frozenset
    edges: frozenset
    viewpoints: Tuple[int, ...] = ()

    def __post_init__(self):
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {a}-{b} uses an unknown node")
        if not set(self.viewpoints) <= self.nodes:
            raise ValueError("viewpoints must be topology nodes")
        if self.nodes and len(_reachable(self.adjacency, min(self.nodes))) != len(self.nodes):
            raise ValueError("topology is not connected")

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int]], viewpoints: Iterable[int] = ()):
        norm = frozenset((a, b) if a < b else (b, a) for a, b in edges if a != b)
        nodes = frozenset(x for e in norm for x in e)
        return cls(nodes, norm, tuple(viewpoints))

    def with_viewpoints(self, viewpoints: Iterable[int]) -> "ToyTopology":
        return ToyTopology(self.nodes, self.edges, tuple(viewpoints))

    @property
    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for n in adj:
            adj[n].sort()
        return adj


def _reachable(adj, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def read_topology(lines: Iterable[str], viewpoints: Iterable[int] = ()) -> ToyTopology:
    """Edge list, one ``asn asn`` pair per line; ``#`` starts a comment."""
    edges = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        a, b = line.split()
        edges.append((int(a), int(b)))
    return ToyTopology.from_edges(edges, viewpoints)


def select_paths(topology: ToyTopology, source: int,
                 adjacency: Optional[Dict[int, List[int]]] = None) -> Dict[int, Tuple[int, ...]]:
    """Best path from ``source`` to every other node.

    Breadth-first by layers. Within a layer the nodes are visited in the
    lexicographic order of their own best paths, so the first one to reach
    a new node is the lexicographically smallest parent.
    """
    adj = adjacency if adjacency is not None else topology.adjacency
    paths = {source: (source,)}
    frontier = [source]
    while frontier:
        frontier.sort(key=paths.__getitem__)
        nxt = []
        for u in frontier:
            base = paths[u]
            for v in adj[u]:
                if v not in paths:
                    paths[v] = base + (v,)
                    nxt.append(v)
        frontier = nxt
    del paths[source]
    return paths


def _dest_prefix(index: int) -> Prefix:
    return Prefix(4, index << 8, 24)


def toy_routes(topology: ToyTopology, source: int, adjacency=None) -> Dict[Prefix, CleanPath]:
    """The RIB a viewpoint in ``source`` would hold: one /24 per destination."""
    index = {n: i for i, n in enumerate(sorted(topology.nodes))}
    return {_dest_prefix(index[d]): CleanPath(p)
            for d, p in select_paths(topology, source, adjacency).items()}


def toy_viewpoint(asn: int) -> ViewpointId:
    return ViewpointId("sim", f"vp{asn}", asn)


def toy_table(topology: ToyTopology, viewpoints: Optional[Iterable[int]] = None) -> RibTable:
    viewpoints = topology.viewpoints if viewpoints is None else viewpoints
    adj = topology.adjacency
    table = RibTable(4)
    for j in viewpoints:
        table.routes[toy_viewpoint(j)] = toy_routes(topology, j, adj)
    return table


def toy_bcs(topology: ToyTopology, viewpoints: Optional[Iterable[int]] = None) -> List[PerViewpointBC]:
    """Unweighted per-viewpoint BC for each viewpoint of a toy topology."""
    table = toy_table(topology, viewpoints)
    return [per_viewpoint_bc(routes, viewpoint=vid) for vid, routes in table.items()]


def pooled_bc(bcs: Sequence[PerViewpointBC], asns: Optional[Iterable[int]] = None) -> Dict[int, float]:
    """Classical BC over the union of the given viewpoints' paths."""
    total = sum(b.total_weight for b in bcs)
    if total == 0:
        raise ValueError("no paths")
    sums: Dict[int, int] = defaultdict(int)
    for b in bcs:
        for asn, w in b.sigma.items():
            sums[asn] += w
    keys = sorted(sums) if asns is None else sorted(asns)
    return {asn: sums.get(asn, 0) / total for asn in keys}


def expected_bc(topology: ToyTopology) -> Dict[int, float]:
    """BC over best paths between all ordered node pairs."""
    return sampled_bc(topology, sorted(topology.nodes))


def sampled_bc(topology: ToyTopology, viewpoints: Iterable[int]) -> Dict[int, float]:
    """BC over only the best paths that end at one of ``viewpoints``."""
    viewpoints = list(viewpoints)
    if not viewpoints:
        raise ValueError("sampled BC needs at least one viewpoint")
    return pooled_bc(toy_bcs(topology, viewpoints), topology.nodes)


def toy_hegemony(topology: ToyTopology, viewpoints: Optional[Iterable[int]] = None,
                 alpha: float = 0.1) -> Dict[int, float]:
    bcs = toy_bcs(topology, viewpoints)
    scores = aggregate(bcs, alpha, min_viewpoints=0, asns=topology.nodes)
    return {asn: s.hegemony for asn, s in scores.items()}


# Fixed topologies -------------------------------------------------------

TRANSIT = 1
REGIONALS = (10, 20, 30)


def two_level_hierarchy() -> ToyTopology:
    """13 ASes: one transit (1), three regionals (10, 20, 30), nine stubs.

    Three of the stubs are multi-homed to two regionals. The three viewpoints
    sit in stubs 101, 105 and 107.
    """
    edges = [(1, 10), (1, 20), (1, 30)]
    edges += [(10, s) for s in (106, 107, 109)]
    edges += [(20, s) for s in (103, 104, 105, 107, 109)]
    edges += [(30, s) for s in (101, 102, 106, 108)]
    return ToyTopology.from_edges(edges, viewpoints=(101, 105, 107))


STUBS = tuple(range(101, 110))


def synthetic_hierarchy(n_nodes: int = 200, n_tier1: int = 5, n_transit: int = 35,
                        multihome: float = 0.7, peering: float = 0.1,
                        seed: int = 0) -> ToyTopology:
    """Random three-tier topology: tier-1 clique, transit ISPs, stubs.

    Transit ISPs buy from two tier-1s and peer with each other with
    probability ``peering``; stubs connect to one transit, or two with
    probability ``multihome``. ASNs: tier-1 1.., transit 101.., stubs 1001..
    """
    rng = random.Random(seed)
    tier1 = list(range(1, n_tier1 + 1))
    transit = list(range(101, 101 + n_transit))
    stubs = list(range(1001, 1001 + n_nodes - n_tier1 - n_transit))
    edges = [(a, b) for i, a in enumerate(tier1) for b in tier1[i + 1:]]
    for t in transit:
        for up in rng.sample(tier1, 2):
            edges.append((t, up))
    for i, a in enumerate(transit):
        for b in transit[i + 1:]:
            if rng.random() < peering:
                edges.append((a, b))
    for s in stubs:
        k = 2 if rng.random() < multihome else 1
        for up in rng.sample(transit, k):
            edges.append((s, up))
    return ToyTopology.from_edges(edges)


def robustness_topology(n_viewpoints: int = 60, seed: int = 0, **kwargs) -> ToyTopology:
    """Synthetic hierarchy with viewpoints placed uniformly at random."""
    top = synthetic_hierarchy(seed=seed, **kwargs)
    rng = random.Random(seed)
    return top.with_viewpoints(sorted(rng.sample(sorted(top.nodes), n_viewpoints)))


# Robustness experiment --------------------------------------------------

@dataclass
class ScoreDistribution:
    values: Sequence[float]
    bins: int = DEFAULT_BINS
    epsilon: float = DEFAULT_EPSILON

    def histogram(self) -> np.ndarray:
        counts, _ = np.histogram(np.asarray(self.values, dtype=float),
                                 bins=self.bins, range=(0.0, 1.0))
        p = counts / max(counts.sum(), 1)
        p = p + self.epsilon
        return p / p.sum()


def kl_divergence(p: ScoreDistribution, q: ScoreDistribution) -> float:
    """KL(p || q) between the smoothed histograms."""
    hp, hq = p.histogram(), q.histogram()
    if hp.shape != hq.shape:
        raise ValueError("distributions use different binning")
    return float(np.sum(hp * np.log(hp / hq)))


METRICS = ("bc", "hegemony")


@dataclass(frozen=True)
class KLRow:
    metric: str
    k: int
    trial: int
    kl: float


def _metric_scores(metric: str, bcs: Sequence[PerViewpointBC], asns, alpha: float) -> List[float]:
    if metric == "bc":
        scores = pooled_bc(bcs, asns)
        return [scores[a] for a in sorted(asns)]
    if metric == "hegemony":
        scores = aggregate(bcs, alpha, min_viewpoints=0, asns=asns)
        return [scores[a].hegemony for a in sorted(asns)]
    raise ValueError(f"unknown metric {metric!r}")


def select_viewpoints(bcs: Sequence[PerViewpointBC], k: int, rng: np.random.Generator) -> List[PerViewpointBC]:
    """Random k viewpoints, spread across collectors.

    Collectors are visited round-robin in random order, drawing a random
    not-yet-used viewpoint from each, so no collector dominates the subset.
    """
    by_collector: Dict[str, List[PerViewpointBC]] = defaultdict(list)
    for b in sorted(bcs, key=lambda b: b.viewpoint):
        by_collector[b.viewpoint.collector].append(b)
    pools = []
    for name in sorted(by_collector):
        members = by_collector[name]
        order = rng.permutation(len(members))
        pools.append([members[i] for i in order])
    chosen: List[PerViewpointBC] = []
    while len(chosen) < k:
        for ci in rng.permutation(len(pools)):
            if pools[ci] and len(chosen) < k:
                chosen.append(pools[ci].pop())
    return chosen


def viewpoint_bcs_for(source: Union[ToyTopology, RibTable], weighted: bool = False) -> List[PerViewpointBC]:
    if isinstance(source, ToyTopology):
        return toy_bcs(source)
    out = []
    for vid, routes in source.items():
        trie = build_trie(routes) if weighted else None
        out.append(per_viewpoint_bc(routes, trie=trie, weighted=weighted, viewpoint=vid))
    return out


def kl_experiment(source: Union[ToyTopology, RibTable], ks: Sequence[int], trials: int,
                  seed: int = 0, metrics: Sequence[str] = METRICS, alpha: float = 0.1,
                  weighted: bool = False, bins: int = DEFAULT_BINS,
                  epsilon: float = DEFAULT_EPSILON) -> List[KLRow]:
    """KL divergence between scores from k random viewpoints and from all of them.

    ``source`` is a toy topology (its viewpoints are used) or a RibTable.
    Each subset is drawn from a generator seeded with ``(seed, k, trial)``,
    so any row can be recomputed on its own.
    """
    bcs = [b for b in viewpoint_bcs_for(source, weighted) if not b.empty]
    asns = set()
    for b in bcs:
        asns.update(b.sigma)
    if isinstance(source, ToyTopology):
        asns |= source.nodes
    asns = sorted(asns)
    reference = {m: ScoreDistribution(_metric_scores(m, bcs, asns, alpha), bins, epsilon)
                 for m in metrics}
    rows = []
    for k in ks:
        if k > len(bcs):
            log.warning("skipping k=%d: only %d viewpoints available", k, len(bcs))
            continue
        for trial in range(trials):
            rng = np.random.default_rng([seed, k, trial])
            subset = select_viewpoints(bcs, k, rng)
            for m in metrics:
                dist = ScoreDistribution(_metric_scores(m, subset, asns, alpha), bins, epsilon)
                rows.append(KLRow(m, k, trial, kl_divergence(dist, reference[m])))
    return rows


def median_kl(rows: Iterable[KLRow]) -> Dict[Tuple[str, int], float]:
    groups: Dict[Tuple[str, int], List[float]] = defaultdict(list)
    for r in rows:
        groups[(r.metric, r.k)].append(r.kl)
    return {key: float(np.median(v)) for key, v in sorted(groups.items())}
