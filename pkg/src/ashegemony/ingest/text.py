"""Line-based interchange format.

One route per line::

    collector|peer_ip|peer_asn|prefix|as_path|timestamp

The AS path is space separated with AS-sets written as ``{1,2}``. Blank lines
and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .stats import ParseStats
from .types import PrefixError, RawPath, RibEntry, ViewpointId, parse_prefix


_path_cache: dict = {}


def parse_as_path(text: str) -> RawPath:
    hit = _path_cache.get(text)
    if hit is not None:
        return hit
    segments = []
    for tok in text.split():
        if tok.startswith("{"):
            if not tok.endswith("}"):
                raise ValueError(f"bad AS-set {tok!r}")
            members = tok[1:-1].split(",")
            segments.append(frozenset(int(m) for m in members))
        else:
            segments.append(int(tok))
    if not segments:
        raise ValueError("empty AS path")
    path = tuple(segments)
    if len(_path_cache) < 1 << 20:
        _path_cache[text] = path
    return path


def render_as_path(path: RawPath) -> str:
    out = []
    for seg in path:
        if isinstance(seg, int):
            out.append(str(seg))
        else:
            out.append("{" + ",".join(str(a) for a in sorted(seg)) + "}")
    return " ".join(out)


def render_text(entries: Iterable[RibEntry]) -> Iterator[str]:
    for e in entries:
        vp = e.viewpoint
        yield (f"{vp.collector}|{vp.peer_ip}|{vp.peer_asn}|{e.prefix}|"
               f"{render_as_path(e.path)}|{e.timestamp}\n")


def parse_text(lines: Iterable[str], stats: Optional[ParseStats] = None) -> Iterator[RibEntry]:
    """Yield a RibEntry per well-formed line; bad lines are counted and skipped."""
    if stats is None:
        stats = ParseStats()
    viewpoints: dict = {}
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|")
        if len(fields) != 6:
            stats.bad_line(lineno, "field count")
            continue
        collector, peer_ip, peer_asn, prefix_s, path_s, ts = fields
        try:
            key = (collector, peer_ip, peer_asn)
            vp = viewpoints.get(key)
            if vp is None:
                vp = viewpoints[key] = ViewpointId(collector, peer_ip, int(peer_asn))
            prefix = parse_prefix(prefix_s)
            path = parse_as_path(path_s)
            timestamp = int(ts)
        except PrefixError as exc:
            stats.bad_line(lineno, str(exc))
            continue
        except ValueError as exc:
            stats.bad_line(lineno, str(exc))
            continue
        if prefix.family == 6 and prefix.length > 64:
            stats.long_ipv6 += 1
        stats.entries += 1
        yield RibEntry(vp, prefix, path, timestamp)
