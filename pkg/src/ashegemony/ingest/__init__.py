"""Reading RIB snapshots into RibEntry streams."""

from .mrt import MrtParseError, decompress_stream, open_input, parse_mrt
from .paths import (AS_SET, EMPTY, LOOP, RESERVED_ASN, PathRejected, classify_full_feed,
                    is_reserved_asn, normalize_path)
from .stats import ParseStats
from .text import parse_as_path, parse_text, render_as_path, render_text
from .types import (CleanPath, Prefix, PrefixError, RibEntry, Viewpoint, ViewpointId,
                    parse_prefix)

__all__ = [
    "AS_SET", "EMPTY", "LOOP", "RESERVED_ASN",
    "CleanPath", "MrtParseError", "ParseStats", "PathRejected", "Prefix", "PrefixError",
    "RibEntry", "Viewpoint", "ViewpointId",
    "classify_full_feed", "decompress_stream", "is_reserved_asn", "normalize_path",
    "open_input", "parse_as_path", "parse_mrt", "parse_prefix", "parse_text",
    "render_as_path", "render_text",
]
