"""AS hegemony: trimmed-mean, per-viewpoint betweenness centrality from BGP RIBs."""

__version__ = "0.1.0"

from .core import (GLOBAL, EmptyResult, GraphScope, HegemonyConfig, HegemonyScore,  # noqa: E402
                   PerViewpointBC, aggregate, graph_stats, hegemony, per_viewpoint_bc,
                   trimmed_mean)
from .sweep import summarize_local, sweep  # noqa: E402
from .table import RibTable  # noqa: E402

__all__ = [
    "GLOBAL", "EmptyResult", "GraphScope", "HegemonyConfig", "HegemonyScore",
    "PerViewpointBC", "RibTable", "aggregate", "graph_stats", "hegemony",
    "per_viewpoint_bc", "summarize_local", "sweep", "trimmed_mean",
]
