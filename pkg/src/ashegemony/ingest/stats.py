from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

log = logging.getLogger(__name__)

MAX_REPORTED_LINES = 100


@dataclass
class ParseStats:
    """Counters filled in while a parser runs."""

    entries: int = 0
    records: int = 0
    skipped_records: int = 0
    unknown_types: int = 0
    unknown_peer: int = 0
    bad_lines: int = 0
    long_ipv6: int = 0
    bad_line_numbers: List[Tuple[int, str]] = field(default_factory=list)

    def bad_line(self, lineno: int, why: str) -> None:
        self.bad_lines += 1
        if len(self.bad_line_numbers) < MAX_REPORTED_LINES:
            self.bad_line_numbers.append((lineno, why))
        log.warning("line %d skipped: %s", lineno, why)

    def merge(self, other: "ParseStats") -> None:
        for name in ("entries", "records", "skipped_records", "unknown_types",
                     "unknown_peer", "bad_lines", "long_ipv6"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        room = MAX_REPORTED_LINES - len(self.bad_line_numbers)
        self.bad_line_numbers.extend(other.bad_line_numbers[:max(room, 0)])

    def as_dict(self) -> dict:
        return {
            "entries": self.entries,
            "records": self.records,
            "skipped_records": self.skipped_records,
            "unknown_types": self.unknown_types,
            "unknown_peer": self.unknown_peer,
            "bad_lines": self.bad_lines,
            "long_ipv6": self.long_ipv6,
        }
