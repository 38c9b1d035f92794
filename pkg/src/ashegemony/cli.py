"""Command-line front end.

    ashegemony global RIB... [options]
    ashegemony local RIB... --origin 64500,64501 | --all
    ashegemony timeseries MANIFEST...
    ashegemony robustness (RIB... | --topology EDGES | --synthetic)
    ashegemony trie RIB --peer-asn ASN

Every numeric option can also be set through an ``ASHEGE_<NAME>`` environment
variable (``ASHEGE_ALPHA``, ``ASHEGE_JOBS``...). Exit codes: 0 ok, 1 input
error, 2 empty result.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple

from . import __version__
from .core import (GLOBAL, EmptyResult, GraphScope, HegemonyConfig, aggregate, hegemony,
                   viewpoint_bcs)
from .ingest import MrtParseError, ParseStats, open_input, parse_mrt, parse_text
from .report import (GLOBAL_HEADER, KL_HEADER, LOCAL_HEADER, TIMESERIES_HEADER, RunManifest,
                     fmt, global_rows, local_rows, read_csv, render, sha256_file, sha256_text)
from .simulator import (DEFAULT_BINS, DEFAULT_EPSILON, kl_experiment, read_topology,
                        robustness_topology)
from .sweep import sweep
from .table import RibTable
from .weighting import build_trie

log = logging.getLogger("ashegemony")

ENV_PREFIX = "ASHEGE_"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EMPTY = 2


class InputError(Exception):
    pass


def env(name: str, default: str) -> str:
    return os.environ.get(ENV_PREFIX + name, default)


# Input ------------------------------------------------------------------

def _is_text(head: bytes) -> bool:
    return bool(head) and all(32 <= b < 127 or b in b"\r\n\t" for b in head)


def read_entries(path: str, input_format: str, collector: Optional[str], stats: ParseStats):
    try:
        stream = open_input(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    head = stream.peek(64)[:64] if hasattr(stream, "peek") else b""
    fmt_ = input_format
    if fmt_ == "auto":
        fmt_ = "text" if _is_text(head) else "mrt"
    if fmt_ == "text":
        return parse_text(io.TextIOWrapper(stream, encoding="utf-8", errors="replace"), stats)
    name = collector or Path(path).name.split(".")[0]
    return parse_mrt(stream, name, stats)


def load_table(paths: List[str], args, stats: ParseStats) -> Tuple[RibTable, List[dict]]:
    table = RibTable(args.family)
    digests = []
    for path in paths:
        try:
            entries = read_entries(path, args.input_format, args.collector, stats)
            table.extend(entries, args.as_set, not args.keep_reserved)
            digests.append({"path": path, "sha256": sha256_file(path)})
        except MrtParseError as exc:
            raise InputError(f"{path}: {exc}") from None
        except (OSError, EOFError) as exc:
            raise InputError(f"{path}: {exc}") from None
    return table, digests


def make_config(args) -> HegemonyConfig:
    weighted = {"auto": None, "on": True, "off": False}[args.weighted]
    return HegemonyConfig(
        alpha=args.alpha,
        weighted=weighted,
        family=args.family,
        min_viewpoints=args.min_viewpoints,
        full_feed_only=not args.all_peers,
        full_feed_fraction=args.full_feed_fraction,
        as_set_policy=args.as_set,
        filter_reserved=not args.keep_reserved,
        jobs=args.jobs,
    )


def config_echo(config: HegemonyConfig, args) -> dict:
    return {
        "alpha": config.alpha,
        "family": config.family,
        "weighted": config.use_weights,
        "weighted_mode": args.weighted,
        "full_feed_only": config.full_feed_only,
        "full_feed_fraction": config.full_feed_fraction,
        "min_viewpoints": config.min_viewpoints,
        "as_set_policy": config.as_set_policy,
        "filter_reserved": config.filter_reserved,
        "format": args.format,
    }


def _date(args, snapshot_time: int) -> Optional[str]:
    if args.date:
        return args.date
    if snapshot_time:
        return datetime.fromtimestamp(snapshot_time, timezone.utc).strftime("%Y-%m-%d")
    return None


def emit(text: str, args, manifest: RunManifest) -> None:
    manifest.output_sha256 = sha256_text(text)
    if args.output:
        Path(args.output).write_text(text)
        manifest.output = Path(args.output).name
    else:
        sys.stdout.write(text)
    manifest_path = args.manifest or (args.output + ".manifest.json" if args.output else None)
    if manifest_path:
        Path(manifest_path).write_text(manifest.to_json())


def _viewpoint_counters(table: RibTable, config: HegemonyConfig) -> Tuple[RibTable, dict]:
    flags = table.classify(config.full_feed_fraction)
    full = sum(1 for vp in flags.values() if vp.full_feed)
    work = table.full_feed(config.full_feed_fraction) if config.full_feed_only else table
    return work, {"total": len(flags), "full_feed": full, "used": len(work.routes)}


# Commands ---------------------------------------------------------------

def cmd_global(args) -> int:
    config = make_config(args)
    stats = ParseStats()
    table, digests = load_table(args.inputs, args, stats)
    work, vp_counts = _viewpoint_counters(table, config)
    bcs = viewpoint_bcs(work, GLOBAL, config.use_weights, config.jobs)
    vp_counts["empty"] = sum(1 for b in bcs if b.empty)
    manifest = RunManifest("global", config_echo(config, args), digests,
                           {"table": table.counters(), "parse": stats.as_dict(),
                            "viewpoints": vp_counts},
                           table.max_timestamp, _date(args, table.max_timestamp))
    try:
        scores = aggregate(bcs, config.alpha, config.min_viewpoints)
    except EmptyResult as exc:
        log.error("empty result: %s", exc)
        manifest.counters["low_confidence"] = True
        emit(render(GLOBAL_HEADER, [], args.format), args, manifest)
        return EXIT_EMPTY
    manifest.counters["low_confidence"] = any(s.low_confidence for s in scores.values())
    emit(render(GLOBAL_HEADER, global_rows(scores, GLOBAL), args.format), args, manifest)
    return EXIT_OK


def _parse_origins(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part.upper().removeprefix("AS")))
    return out


def cmd_local(args) -> int:
    config = make_config(args)
    stats = ParseStats()
    table, digests = load_table(args.inputs, args, stats)
    work, vp_counts = _viewpoint_counters(table, config)
    if args.all:
        results = sweep(work, HegemonyConfig(**{**config.__dict__, "full_feed_only": False}))
    else:
        try:
            origins = _parse_origins(args.origin)
            scopes = [GraphScope.local(o) for o in origins]
        except ValueError as exc:
            raise InputError(f"--origin: {exc}") from None
        results = {}
        local_config = HegemonyConfig(**{**config.__dict__, "full_feed_only": False})
        for scope in scopes:
            try:
                results[scope.origin] = hegemony(work, scope, local_config)
            except EmptyResult:
                log.warning("origin %d: no paths", scope.origin)
    manifest = RunManifest("local", config_echo(config, args), digests,
                           {"table": table.counters(), "parse": stats.as_dict(),
                            "viewpoints": vp_counts, "origins": len(results)},
                           table.max_timestamp, _date(args, table.max_timestamp))
    manifest.counters["low_confidence"] = any(
        s.low_confidence for scores in results.values() for s in scores.values())
    emit(render(LOCAL_HEADER, local_rows(results), args.format), args, manifest)
    return EXIT_OK if results else EXIT_EMPTY


COMPARABLE_KEYS = ("alpha", "weighted", "family")


def _scope_key(scope: str):
    if scope == "global":
        return (0, 0)
    return (1, int(scope.split(":", 1)[1]))


def cmd_timeseries(args) -> int:
    rows = []
    reference = None
    for path in args.manifests:
        try:
            manifest = RunManifest.from_json(Path(path).read_text())
        except (OSError, ValueError, TypeError) as exc:
            raise InputError(f"{path}: {exc}") from None
        key = {k: manifest.config.get(k) for k in COMPARABLE_KEYS}
        if reference is None:
            reference = key
        elif key != reference and not args.force:
            log.error("%s: %s differs from %s; values are not comparable (use --force)",
                      path, key, reference)
            return EXIT_INPUT
        if manifest.config.get("format") != "csv" or not manifest.output:
            raise InputError(f"{path}: timeseries needs CSV outputs written with -o")
        date = manifest.date or str(manifest.snapshot_time)
        try:
            table_rows = read_csv(Path(path).parent / manifest.output)
        except OSError as exc:
            raise InputError(f"{path}: {exc}") from None
        for r in table_rows:
            scope = r["scope"] if "scope" in r else f"local:{r['origin_asn']}"
            rows.append((scope, int(r["asn"]), date, r["hegemony"]))
    rows.sort(key=lambda r: (_scope_key(r[0]), r[1], r[2]))
    text = render(TIMESERIES_HEADER, [[d, s, a, h] for s, a, d, h in rows], "csv")
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rows else EXIT_EMPTY


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_robustness(args) -> int:
    digests = []
    if args.topology:
        viewpoints = []
        if args.viewpoints:
            viewpoints = [int(x) for x in Path(args.viewpoints).read_text().split()]
        with open(args.topology) as fh:
            source = read_topology(fh, viewpoints)
        if not viewpoints:
            source = source.with_viewpoints(sorted(source.nodes))
        digests.append({"path": args.topology, "sha256": sha256_file(args.topology)})
        weighted = False
    elif args.inputs:
        config = make_config(args)
        stats = ParseStats()
        table, digests = load_table(args.inputs, args, stats)
        source, _ = _viewpoint_counters(table, config)
        weighted = config.use_weights
    else:
        source = robustness_topology(args.n_viewpoints, args.seed)
        weighted = False
    metrics = [m.strip() for m in args.metric.split(",")]
    rows = kl_experiment(source, _int_list(args.ks), args.trials, args.seed, metrics,
                         args.alpha, weighted)
    text = render(KL_HEADER, [[r.metric, r.k, r.trial, fmt(r.kl)] for r in rows], args.format)
    manifest = RunManifest("robustness", {
        "alpha": args.alpha, "ks": args.ks, "trials": args.trials, "seed": args.seed,
        "metrics": metrics, "weighted": weighted, "bins": DEFAULT_BINS,
        "epsilon": DEFAULT_EPSILON, "distribution": "histogram", "format": args.format,
    }, digests)
    emit(text, args, manifest)
    return EXIT_OK if rows else EXIT_EMPTY


def cmd_trie(args) -> int:
    stats = ParseStats()
    table, _ = load_table([args.input], args, stats)
    routes = {}
    for vid, r in table.items():
        if vid.peer_asn == args.peer_asn and (not args.peer_ip or vid.peer_ip == args.peer_ip):
            routes = r
            break
    if not routes:
        log.error("no routes for peer AS%d", args.peer_asn)
        return EXIT_EMPTY
    sys.stdout.write(build_trie(routes).to_csv())
    return EXIT_OK


# Parser -----------------------------------------------------------------

def _input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", type=int, choices=(4, 6), default=env("FAMILY", "4"))
    p.add_argument("--input-format", choices=("auto", "mrt", "text"),
                   default=env("INPUT_FORMAT", "auto"))
    p.add_argument("--collector", default=env("COLLECTOR", "") or None,
                   help="collector name for MRT inputs (default: file name up to the first dot)")
    p.add_argument("--as-set", choices=("reject", "truncate"), default=env("AS_SET", "reject"))
    p.add_argument("--keep-reserved", action="store_true",
                   help="keep paths with private or reserved ASNs")


def _score_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=env("ALPHA", "0.1"))
    p.add_argument("--weighted", choices=("auto", "on", "off"), default=env("WEIGHTED", "auto"))
    p.add_argument("--full-feed-fraction", type=float, default=env("FULL_FEED_FRACTION", "0.75"))
    p.add_argument("--all-peers", action="store_true", help="do not drop partial-feed peers")
    p.add_argument("--min-viewpoints", type=int, default=env("MIN_VIEWPOINTS", "10"))
    p.add_argument("--jobs", type=int, default=env("JOBS", "1"))


def _output_options(p: argparse.ArgumentParser, with_date: bool = True) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=env("FORMAT", "csv"))
    p.add_argument("-o", "--output")
    p.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest.json)")
    if with_date:
        p.add_argument("--date", help="snapshot date for timeseries (default: from RIB timestamps)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ashegemony", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("global", help="hegemony in the global graph")
    p.add_argument("inputs", nargs="+")
    _input_options(p)
    _score_options(p)
    _output_options(p)
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("local", help="hegemony in per-origin local graphs")
    p.add_argument("inputs", nargs="+")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--origin", help="comma separated origin ASNs or ranges")
    group.add_argument("--all", action="store_true", help="every origin in the snapshot")
    _input_options(p)
    _score_options(p)
    _output_options(p)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("timeseries", help="concatenate per-snapshot outputs")
    p.add_argument("manifests", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--force", action="store_true", help="mix alpha/weighting anyway")
    p.set_defaults(func=cmd_timeseries)

    p = sub.add_parser("robustness", help="viewpoint subsampling KL experiment")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--topology", help="edge list file, one 'asn asn' per line")
    p.add_argument("--viewpoints", help="file with viewpoint ASNs (default: all nodes)")
    p.add_argument("--synthetic", action="store_true",
                   help="200-node synthetic hierarchy (the default without other input)")
    p.add_argument("--n-viewpoints", type=int, default=60)
    p.add_argument("--ks", default=env("KS", "5,10,20,40"))
    p.add_argument("--trials", type=int, default=env("TRIALS", "30"))
    p.add_argument("--seed", type=int, default=env("SEED", "0"))
    p.add_argument("--metric", default="bc,hegemony")
    _input_options(p)
    _score_options(p)
    _output_options(p, with_date=False)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("trie", help="dump one peer's prefix weights as CSV")
    p.add_argument("input")
    p.add_argument("--peer-asn", type=int, required=True)
    p.add_argument("--peer-ip")
    _input_options(p)
    p.set_defaults(func=cmd_trie)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"ashegemony: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"ashegemony: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
