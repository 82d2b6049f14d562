"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error. Errors
are reported on stderr as one JSON object per line.
"""

import argparse
import json
import os
import sys

from .algorithms import ALGORITHMS, write_values_text, format_value
from .bench import format_bench_csv, emit_bench_csv, run_sweep
from .engine import RunConfig, run
from .errors import BPPError, ConfigError, DataError, StorageIOError
from .formats import read_edge_file, write_value_file
from .ingest import EDGE_FILE, compute_stats, ingest_file
from .sharder import MANIFEST_FILE, read_manifest, shard_graph
from .storage import ShardStore

EXIT_USAGE, EXIT_DATA, EXIT_IO = 1, 2, 3
SHARD_DIR = "shards"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _shard_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty shard list")
    return values


def build_parser():
    p = _Parser(prog="bpp", description="Out-of-core BiShard Parallel graph engine")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="parse a text edge list into a dense binary edge file")
    s.add_argument("--input", required=True)
    s.add_argument("--output-dir", required=True)
    s.add_argument("--undirected", action="store_true", help="add the reverse of every edge")
    s.add_argument("--dedup", action="store_true", help="drop repeated (src, dst) pairs")

    s = sub.add_parser("shard", help="partition into intervals and build in/out shards")
    s.add_argument("--graph-dir", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--shards", type=int)
    g.add_argument("--budget", type=int, help="max in-edges per interval")
    s.add_argument("--value-bits", type=int, choices=(32, 64), default=32,
                   help="width of stored edge and vertex values")

    s = sub.add_parser("run", help="run an algorithm on a sharded graph")
    s.add_argument("--graph-dir", required=True)
    s.add_argument("--algo", choices=sorted(ALGORITHMS), default="pagerank")
    s.add_argument("--iters", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", help="text file for 'vertex value' lines (default: stdout)")
    s.add_argument("--binary-output", help="also write values in vertex-value file format")

    s = sub.add_parser("bench", help="sweep shard counts and emit CSV")
    s.add_argument("--graph-dir", required=True)
    s.add_argument("--shards-list", type=_shard_list, default=[2, 4, 8, 16])
    s.add_argument("--algo", choices=sorted(ALGORITHMS), default="pagerank")
    s.add_argument("--iters", type=int, default=5)
    s.add_argument("--tol", type=float, default=0.0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--value-bits", type=int, choices=(32, 64), default=32)
    s.add_argument("--output", help="CSV path (default: stdout)")

    s = sub.add_parser("stats", help="print graph and shard statistics as JSON")
    s.add_argument("--graph-dir", required=True)
    return p


def cmd_ingest(args, out, err):
    stats, diag = ingest_file(args.input, args.output_dir, undirected=args.undirected,
                              allow_duplicates=not args.dedup)
    report = stats.as_dict()
    report["comment_lines"] = diag.comment_lines
    report["duplicates_dropped"] = diag.duplicates_dropped
    out.write(json.dumps(report) + "\n")


def cmd_shard(args, out, err):
    manifest = shard_graph(os.path.join(args.graph_dir, EDGE_FILE),
                           os.path.join(args.graph_dir, SHARD_DIR),
                           shards=args.shards, budget=args.budget, value_bits=args.value_bits)
    out.write(json.dumps({"P": manifest.P, "n": manifest.n, "m": manifest.m,
                          "value_bits": manifest.value_bits}) + "\n")


def cmd_run(args, out, err):
    store = ShardStore(read_manifest(os.path.join(args.graph_dir, SHARD_DIR)))
    if args.algo == "wcc":
        # labels stop changing within n passes; a zero-change pass ends the run
        iters = args.iters or store.manifest.n + 1
        tol = 0.5 if args.tol is None else args.tol
    else:
        iters = args.iters or 20
        tol = 0.0 if args.tol is None else args.tol
    config = RunConfig(max_iterations=iters, convergence_tolerance=tol, worker_count=args.workers)
    report = run(store, ALGORITHMS[args.algo](), config)
    values = store.read_values()
    integer = args.algo == "wcc"
    if args.output:
        write_values_text(args.output, values, integer=integer)
    else:
        for v, x in enumerate(values):
            out.write(f"{v} {int(x) if integer else format_value(x)}\n")
    if args.binary_output:
        write_value_file(args.binary_output, values, store.manifest.value_bits)
    summary = {"iterations": report.iterations, "converged": report.converged,
               "final_delta": report.final_delta, "wall_seconds": report.wall_seconds,
               **report.metrics.as_dict()}
    err.write(json.dumps(summary) + "\n")


def cmd_bench(args, out, err):
    rows = run_sweep(os.path.join(args.graph_dir, EDGE_FILE), args.graph_dir, args.shards_list,
                     algorithm=args.algo, iterations=args.iters, tolerance=args.tol,
                     workers=args.workers, value_bits=args.value_bits)
    if args.output:
        emit_bench_csv(rows, args.output)
    else:
        out.write(format_bench_csv(rows))


def cmd_stats(args, out, err):
    edges = read_edge_file(os.path.join(args.graph_dir, EDGE_FILE))
    n = int(max(edges["src"].max(), edges["dst"].max())) + 1 if len(edges) else 0
    report = compute_stats(edges, n).as_dict()
    shard_dir = os.path.join(args.graph_dir, SHARD_DIR)
    if os.path.exists(os.path.join(shard_dir, MANIFEST_FILE)):
        mf = read_manifest(shard_dir)
        report["P"] = mf.P
        report["intervals"] = [[r.first, r.last] for r in mf.intervals]
        report["nonempty_blocks"] = sum(1 for _, length in mf.blocks.values() if length)
    out.write(json.dumps(report) + "\n")


COMMANDS = {"ingest": cmd_ingest, "shard": cmd_shard, "run": cmd_run,
            "bench": cmd_bench, "stats": cmd_stats}


def _fail(err, code, exc):
    err.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _fail(err, EXIT_USAGE, e)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args, out, err)
    except (UsageError, ConfigError) as e:
        return _fail(err, EXIT_USAGE, e)
    except StorageIOError as e:
        return _fail(err, EXIT_IO, e)
    except (DataError, BPPError) as e:
        return _fail(err, EXIT_DATA, e)
    except OSError as e:
        return _fail(err, EXIT_IO, e)
    return 0


if __name__ == "__main__":
    sys.exit(main())
