"""Fixture generators and brute-force oracles shared by the test modules.

The oracles work from raw RibEntry lists with Fractions and quadratic
loops; they deliberately avoid the package's table, trie and aggregation
code.
"""

import ipaddress
import random
from decimal import Decimal
from fractions import Fraction

from ashegemony.ingest import Prefix, RibEntry, ViewpointId, parse_prefix

TS = 1496275200


def entry(collector, peer_ip, peer_asn, prefix, path, ts=TS):
    return RibEntry(ViewpointId(collector, peer_ip, peer_asn), parse_prefix(prefix),
                    tuple(path), ts)


def random_prefixes(rng, count, nested=True):
    prefixes = set()
    while len(prefixes) < count:
        base = rng.randrange(1 << 16) << 16
        length = rng.choice([16, 17, 18, 20, 22, 24]) if nested else 24
        if nested and rng.random() < 0.5:
            # put it inside an existing one now and then
            if prefixes:
                parent = rng.choice(sorted(prefixes))
                if parent.length < 24:
                    length = rng.randrange(parent.length + 1, 25)
                    span = 1 << (32 - parent.length)
                    base = parent.network + rng.randrange(span)
        net = base & ~((1 << (32 - length)) - 1) & 0xFFFFFFFF
        prefixes.add(Prefix(4, net, length))
    return sorted(prefixes)


def random_snapshot(seed, n_viewpoints=None, n_ases=None, n_prefixes=None,
                    n_origins=None, nested=True, prepend=True):
    """Random RIB rows: each viewpoint routes every prefix over a random path."""
    rng = random.Random(seed)
    n_viewpoints = n_viewpoints or rng.randint(1, 30)
    n_ases = n_ases or rng.randint(max(n_viewpoints, 5), 100)
    n_prefixes = n_prefixes or rng.randint(1, 40)
    pool = list(range(1000, 1000 + n_ases))
    peers = rng.sample(pool, min(n_viewpoints, len(pool)))
    origins = rng.sample(pool, n_origins or rng.randint(1, min(10, n_ases)))
    prefixes = random_prefixes(rng, n_prefixes, nested)
    # every origin owns at least one prefix when there are enough prefixes
    owner = {p: origins[i] if i < len(origins) else rng.choice(origins)
             for i, p in enumerate(rng.sample(prefixes, len(prefixes)))}
    entries = []
    for i, peer in enumerate(peers):
        collector = f"rrc{i % 3:02d}"
        ip = f"10.0.{i // 250}.{i % 250 + 1}"
        for p in prefixes:
            if rng.random() < 0.1 and p != prefixes[-1]:
                continue  # partial visibility, but never an empty viewpoint
            origin = owner[p]
            mid = [a for a in rng.sample(pool, rng.randint(0, 4)) if a not in (peer, origin)]
            path = [peer] + mid + [origin] if peer != origin else [origin]
            if prepend and rng.random() < 0.2:
                k = rng.randrange(len(path))
                path.insert(k, path[k])
            entries.append(RibEntry(ViewpointId(collector, ip, peer), p, tuple(path), TS))
    return entries


def origins_fixture(seed=0, n_origins=50, n_viewpoints=30):
    """A snapshot in which each of ``n_origins`` origins announces something."""
    return random_snapshot(seed, n_viewpoints=n_viewpoints, n_ases=100,
                           n_prefixes=2 * n_origins, n_origins=n_origins)


def star_entries(hub=2000, leaves=(2001, 2002, 2003, 2004, 2005)):
    """Every leaf hosts a viewpoint and reaches every other leaf through the hub."""
    out = []
    for i, leaf in enumerate(leaves):
        for j, dest in enumerate(leaves):
            if dest == leaf:
                continue
            out.append(entry("rrc00", f"10.0.0.{i + 1}", leaf, f"192.0.{j}.0/24",
                             [leaf, hub, dest]))
    return out


# Oracles ----------------------------------------------------------------

def collapse(path):
    out = []
    for a in path:
        if not out or out[-1] != a:
            out.append(a)
    return out


def oracle_routes(entries):
    """viewpoint -> prefix -> collapsed path, last row wins."""
    routes = {}
    for e in entries:
        routes.setdefault(e.viewpoint, {})[e.prefix] = collapse(e.path)
    return routes


def _contains(p, q):
    a, b = ipaddress.ip_network(str(p)), ipaddress.ip_network(str(q))
    return a != b and b.subnet_of(a)


def oracle_weights(prefixes):
    """Exclusive size of each prefix by quadratic containment checks."""
    out = {}
    for p in prefixes:
        inner = [q for q in prefixes if _contains(p, q)]
        maximal = [q for q in inner if not any(_contains(r, q) for r in inner)]
        out[p] = ipaddress.ip_network(str(p)).num_addresses - sum(
            ipaddress.ip_network(str(q)).num_addresses for q in maximal)
    return out


def oracle_bc(routes, origin=None, weighted=False):
    """Fractions per AS for one viewpoint, or None when it has no weight."""
    weights = oracle_weights(list(routes)) if weighted else {p: 1 for p in routes}
    total = 0
    sums = {}
    for p, path in routes.items():
        if origin is not None and path[-1] != origin:
            continue
        w = weights[p]
        total += w
        for a in set(path):
            sums[a] = sums.get(a, 0) + w
    if total == 0:
        return None
    return {a: Fraction(s, total) for a, s in sums.items()}


def oracle_floor(alpha, n):
    return int(Decimal(repr(alpha)) * n)


def oracle_hegemony(entries, origin=None, alpha=0.0, weighted=False):
    per_vp = []
    for vid, routes in sorted(oracle_routes(entries).items()):
        bc = oracle_bc(routes, origin, weighted)
        if bc is not None:
            per_vp.append(bc)
    n = len(per_vp)
    asns = set().union(*per_vp) if per_vp else set()
    lo = oracle_floor(alpha, n)
    out = {}
    for a in asns:
        values = sorted(bc.get(a, Fraction(0)) for bc in per_vp)
        kept = values[lo:n - lo]
        out[a] = float(sum(kept) / len(kept))
    return out
