"""Exclusive address-space weights for advertised prefixes.

Every address is attributed to the most specific prefix that covers it in one
viewpoint's RIB. The weight of a prefix (and so of its path) is the number of
addresses attributed to it: its size minus whatever more-specific advertised
prefixes carve out of it.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, Iterator, Optional, Tuple

from .ingest.types import Prefix

log = logging.getLogger(__name__)


class PrefixNotFound(KeyError):
    pass


class _Node:
    __slots__ = ("prefix", "path", "parent", "exclusive_count")

    def __init__(self, prefix: Prefix, path):
        self.prefix = prefix
        self.path = path
        self.parent: Optional[Prefix] = None
        self.exclusive_count = 0


class PrefixTrie:
    """Advertised prefixes of one viewpoint with their exclusive address counts.

    Nodes are keyed by ``(network, length)``. Parent links point at the
    closest advertised covering prefix, so the structure is the compressed
    binary trie over advertised prefixes only.
    """

    def __init__(self, family: int):
        self.family = family
        self.bits = 32 if family == 4 else 128
        self.nodes: Dict[Prefix, _Node] = {}
        self.duplicates = 0
        self.default_routes = 0
        self._lengths: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, prefix) -> bool:
        return prefix in self.nodes

    def exclusive_count(self, prefix: Prefix) -> int:
        try:
            return self.nodes[prefix].exclusive_count
        except KeyError:
            raise PrefixNotFound(prefix) from None

    def path(self, prefix: Prefix):
        return self.nodes[prefix].path

    def parent(self, prefix: Prefix) -> Optional[Prefix]:
        return self.nodes[prefix].parent

    def lookup(self, address: int) -> Optional[Prefix]:
        """Longest-prefix match for an integer address."""
        for length in self._lengths:
            shift = self.bits - length
            key = Prefix(self.family, (address >> shift) << shift, length)
            if key in self.nodes:
                return key
        return None

    def items(self) -> Iterator[Tuple[Prefix, int]]:
        for prefix in sorted(self.nodes):
            yield prefix, self.nodes[prefix].exclusive_count

    def total(self) -> int:
        return sum(node.exclusive_count for node in self.nodes.values())

    def to_csv(self) -> str:
        lines = ["prefix,exclusive_count"]
        lines.extend(f"{p},{n}" for p, n in self.items())
        return "\n".join(lines) + "\n"


def build_trie(routes: Iterable) -> PrefixTrie:
    """Build the trie from ``(prefix, path)`` pairs or a ``{prefix: path}`` map.

    Duplicated prefixes keep the last path and bump ``duplicates``. Default
    routes are left out. Mixing address families raises ValueError.
    """
    if isinstance(routes, dict):
        routes = routes.items()
    trie: Optional[PrefixTrie] = None
    family = None
    for prefix, path in routes:
        if family is None:
            family = prefix.family
            trie = PrefixTrie(family)
        elif prefix.family != family:
            raise ValueError("mixed address families in one trie")
        if prefix.length == 0:
            trie.default_routes += 1
            continue
        node = trie.nodes.get(prefix)
        if node is not None:
            trie.duplicates += 1
            node.path = path
        else:
            trie.nodes[prefix] = _Node(prefix, path)
    if trie is None:
        return PrefixTrie(4)
    if trie.duplicates:
        log.warning("%d duplicated prefixes while building trie", trie.duplicates)
    _assign_counts(trie)
    return trie


def _assign_counts(trie: PrefixTrie) -> None:
    bits = trie.bits
    # Sorted by (network, length) a covering prefix always precedes the
    # prefixes it covers, so a stack of open ancestors finds each parent.
    stack = []
    for prefix in sorted(trie.nodes):
        end = prefix.network + (1 << (bits - prefix.length))
        while stack and stack[-1][1] < end:
            stack.pop()
        node = trie.nodes[prefix]
        node.exclusive_count = 1 << (bits - prefix.length)
        if stack:
            parent = stack[-1][0]
            node.parent = parent.prefix
            # Full size: grandchildren are subtracted from this node instead.
            parent.exclusive_count -= node.exclusive_count
        stack.append((node, end))
    trie._lengths = tuple(sorted({p.length for p in trie.nodes}, reverse=True))


def path_weight(trie: PrefixTrie, prefix: Prefix) -> int:
    """Addresses routed by ``prefix`` and by no more-specific advertised prefix."""
    return trie.exclusive_count(prefix)
