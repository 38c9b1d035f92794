"""CSV/JSON tables and the run manifest written next to them."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional

from . import __version__
from .core import GraphScope, HegemonyScore, ranked

GLOBAL_HEADER = ["scope", "asn", "hegemony", "n_viewpoints", "n_trimmed", "low_confidence"]
LOCAL_HEADER = ["origin_asn", "asn", "hegemony", "n_viewpoints", "n_trimmed", "low_confidence"]
KL_HEADER = ["metric", "k", "trial", "kl"]
TIMESERIES_HEADER = ["date", "scope", "asn", "hegemony"]

# Policies that shape the numbers but are not flags; echoed in every manifest.
FIXED_POLICIES = {
    "prepending": "collapsed",
    "endpoints": "counted",
    "missing_as": "zero",
    "tie_break": "score_then_viewpoint_id",
    "multipath": "last_seen_per_viewpoint_prefix",
    "default_route": "excluded",
    "covered_prefixes": "longest_prefix_match_attribution",
    "local_total_weight": "joint_over_origin_prefixes",
    "moas": "per_origin",
}


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _row(s: HegemonyScore) -> list:
    return [s.asn, fmt(s.hegemony), s.n_viewpoints, s.n_trimmed,
            "true" if s.low_confidence else "false"]


def global_rows(scores: Mapping[int, HegemonyScore], scope: GraphScope) -> List[list]:
    return [[str(scope)] + _row(s) for s in ranked(scores, scope)]


def local_rows(results: Mapping[int, Mapping[int, HegemonyScore]]) -> List[list]:
    rows = []
    for origin in sorted(results):
        scores = [s for asn, s in results[origin].items() if asn != origin]
        scores.sort(key=lambda s: (-s.hegemony, s.asn))
        rows.extend([origin] + _row(s) for s in scores)
    return rows


def to_csv(header: List[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def to_json(header: List[str], rows: Iterable[list]) -> str:
    records = []
    for row in rows:
        rec = dict(zip(header, row))
        for key in ("hegemony", "kl"):
            if key in rec:
                rec[key] = float(rec[key])
        if "low_confidence" in rec:
            rec["low_confidence"] = rec["low_confidence"] == "true"
        records.append(rec)
    return json.dumps(records, indent=1) + "\n"


def render(header: List[str], rows: List[list], format: str = "csv") -> str:
    if format == "json":
        return to_json(header, rows)
    return to_csv(header, rows)


def read_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: Dict
    inputs: List[Dict] = field(default_factory=list)
    counters: Dict = field(default_factory=dict)
    snapshot_time: Optional[int] = None
    date: Optional[str] = None
    output: Optional[str] = None
    output_sha256: Optional[str] = None
    tool_version: str = __version__
    policies: Dict = field(default_factory=lambda: dict(FIXED_POLICIES))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))
