"""Command-line entry point.

Subcommands: ``run`` (execute algorithms over an instance and write traces),
``compare`` (tabulate trace CSVs side by side), ``gen`` (write an instance
JSON). Exit codes: 0 success, 2 configuration error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algorithms import ALGORITHMS, STREAMING_ALGORITHMS
from .core import ResourceLimitError
from .generators import GENERATORS, generate
from .harness import (RunConfig, compare, comparison_csv, comparison_text,
                      parse_kv_params, run)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="submodstream",
        description="Benchmark harness for consistent streaming submodular "
                    "maximization under a cardinality constraint.")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser(
        "run", help="run algorithms over an instance and write trace files")
    runp.add_argument("--algo", required=True, nargs="+",
                      help="algorithm names (comma- or space-separated); "
                           f"'all' = the four streaming algorithms; known: "
                           f"{', '.join(sorted(ALGORITHMS))}")
    runp.add_argument("--instance", required=True,
                      help="generator call (e.g. swapping-hard:i=7,delta=0.01),"
                           " dataset reference (e.g. dominating:edges.txt), or"
                           " instance JSON path")
    runp.add_argument("--k", type=int, default=None,
                      help="cardinality constraint (default 20 unless the "
                           "instance pins one)")
    runp.add_argument("--eps", type=float, default=0.1)
    runp.add_argument("--beta", type=float, default=1.14)
    runp.add_argument("--alpha", type=float, default=None,
                      help="log-det regularization override")
    runp.add_argument("--bandwidth", type=float, default=None,
                      help="log-det kernel bandwidth override")
    runp.add_argument("--out", required=True, help="output directory")
    runp.add_argument("--reference", choices=("brute", "greedy", "none"),
                      default="none",
                      help="per-step brute-force optimum column, or an "
                           "offline-greedy final value in the summary")
    runp.add_argument("--jobs", type=int, default=1,
                      help="parallel runs (one process per algorithm)")
    runp.add_argument("--brute-cap", type=int, default=10 ** 6,
                      help="max subsets a brute-force reference may touch")

    cmpp = sub.add_parser(
        "compare", help="tabulate traces of one instance side by side")
    cmpp.add_argument("traces", nargs="+", help="trace CSV paths")
    cmpp.add_argument("--csv", default=None,
                      help="where to write the CSV form (default: "
                           "comparison.csv next to the first trace)")

    genp = sub.add_parser("gen", help="write an instance JSON")
    genp.add_argument("generator", help=f"one of: {', '.join(sorted(GENERATORS))}")
    genp.add_argument("--params", default="",
                      help="comma-separated key=value generator parameters")
    genp.add_argument("--out", default=None,
                      help="output path (default: print to stdout)")
    return parser


def _split_algos(raw: list[str]) -> list[str]:
    names: list[str] = []
    for token in raw:
        for name in token.split(","):
            name = name.strip()
            if not name:
                continue
            if name == "all":
                names.extend(STREAMING_ALGORITHMS)
            else:
                names.append(name)
    seen = set()
    unique = []
    for name in names:
        if name not in seen:
            seen.add(name)
            unique.append(name)
    return unique


def _cmd_run(args) -> int:
    config = RunConfig(
        algorithms=_split_algos(args.algo), instance=args.instance,
        out=Path(args.out), k=args.k, eps=args.eps, beta=args.beta,
        alpha=args.alpha, bandwidth=args.bandwidth,
        reference=args.reference, jobs=args.jobs, brute_cap=args.brute_cap)
    summary = run(config)
    print(f"instance {summary['instance']} (hash {summary['instance_hash'][:8]}), "
          f"k={summary['k']}, {summary['stream_length']} steps")
    for name, row in summary["algorithms"].items():
        print(f"  {name}: final value {row['final_value']:.6g}, "
              f"{row['cumulative_additions']} cumulative additions, "
              f"{row['total_oracle_calls']} oracle calls "
              f"({row['wall_time_s']:.2f}s) -> {row['trace_csv']}")
    print(f"summary: {Path(args.out) / 'summary.json'}")
    return 0


def _cmd_compare(args) -> int:
    rows = compare(args.traces)
    print(comparison_text(rows))
    csv_path = Path(args.csv) if args.csv \
        else Path(args.traces[0]).parent / "comparison.csv"
    csv_path.write_text(comparison_csv(rows))
    print(f"csv: {csv_path}")
    return 0


def _cmd_gen(args) -> int:
    spec = generate(args.generator, parse_kv_params(args.params))
    text = spec.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out} (hash {spec.digest()[:8]})")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "compare": _cmd_compare,
               "gen": _cmd_gen}[args.command]
    try:
        return handler(args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FileNotFoundError, NotADirectoryError,
            IsADirectoryError, PermissionError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
