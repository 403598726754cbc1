"""Benchmark harness: resolve instances, run algorithms, write traces.

An instance reference is one of
  * a generator call: ``swapping-hard:i=7,delta=0.01``
  * a dataset reference: ``dominating:edges.txt?limit=500``,
    ``kmedoid:points.csv?sample=1000&seed=0``, ``logdet:points.csv``,
    ``recommendation:movies.csv?user=user.csv``
  * a path to an instance JSON written by the ``gen`` subcommand.

Dataset paths resolve against the SUBMODSTREAM_DATA environment variable
(default ``data``). Each (algorithm, instance) run writes one trace CSV and
one trace JSON; a run bundle ends with a summary JSON.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import (ALGORITHMS, brute_force_opt, make_algorithm,
                         offline_greedy)
from .core import (ContractViolationError, ResourceLimitError, RunTrace,
                   atomic_write_text, read_trace_csv, validate_trace,
                   write_trace_csv, write_trace_json)
from .generators import GENERATORS, InstanceSpec, generate
from .ingest import (load_edge_list, load_feature_matrix, load_points_csv,
                     subsample)
from .oracles import (DominatingOracle, KMedoidOracle, LogDetOracle,
                      RecommendationOracle)

DATA_DIR_ENV = "SUBMODSTREAM_DATA"
DATASET_KINDS = ("dominating", "kmedoid", "logdet", "recommendation")
BRUTE_CAP = 10 ** 6


@dataclass
class RunConfig:
    """One batch of runs: a set of algorithms over one instance."""

    algorithms: list[str]
    instance: str
    out: Path
    k: int | None = None
    eps: float = 0.1
    beta: float = 1.14
    alpha: float | None = None
    bandwidth: float | None = None
    reference: str = "none"
    jobs: int = 1
    brute_cap: int = BRUTE_CAP


@dataclass
class ResolvedInstance:
    """An instance reference turned into something runnable."""

    label: str
    oracle: object
    stream: list[int]
    digest: str
    pinned_k: int | None = None


def parse_kv_params(text: str) -> dict:
    """Parse "a=1,b=0.5,c=word" with int/float/string type sniffing."""
    params: dict = {}
    if not text:
        return params
    for chunk in text.split(","):
        if "=" not in chunk:
            raise ValueError(f"expected key=value, got {chunk!r}")
        key, _, raw = chunk.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError:
                params[key] = raw
    return params


def data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def _resolve_data_path(name: str) -> Path:
    path = Path(name)
    if path.is_absolute() or path.exists():
        return path
    candidate = data_dir() / name
    if candidate.exists():
        return candidate
    raise FileNotFoundError(
        f"dataset file {name!r} not found directly or under "
        f"{data_dir()} (set ${DATA_DIR_ENV} to relocate the data directory)")


def _parse_query(text: str) -> dict:
    params: dict = {}
    if not text:
        return params
    for chunk in text.split("&"):
        if "=" not in chunk:
            raise ValueError(f"expected key=value in query, got {chunk!r}")
        key, _, raw = chunk.partition("=")
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError:
                params[key] = raw
    return params


def _reference_digest(kind: str, path: Path, params: dict, ground: int) -> str:
    doc = {"kind": kind, "file": path.name, "params": params, "ground": ground}
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _take(params: dict, key: str, default=None):
    return params.pop(key, default)


def _load_point_array(path: Path, params: dict) -> np.ndarray:
    lat_col = _take(params, "lat", "lat")
    lon_col = _take(params, "lon", "lon")
    limit = _take(params, "limit")
    points = load_points_csv(path, lat_col=lat_col, lon_col=lon_col,
                             limit=limit)
    sample = _take(params, "sample")
    if sample is not None:
        points = subsample(points, sample, seed=_take(params, "seed", 0))
    return np.asarray(points.points, dtype=float)


def _resolve_dataset(kind: str, rest: str, config: RunConfig) -> ResolvedInstance:
    name, _, query = rest.partition("?")
    params = _parse_query(query)
    path = _resolve_data_path(name)
    label = f"{kind}:{name}" + (f"?{query}" if query else "")
    if config.alpha is not None or config.bandwidth is not None:
        if kind != "logdet":
            raise ValueError("--alpha/--bandwidth only apply to logdet "
                             "instances")
    if kind == "dominating":
        limit = _take(params, "limit")
        if params:
            raise ValueError(f"unknown dominating parameters: {sorted(params)}")
        graph = load_edge_list(path)
        oracle = DominatingOracle(graph.vertex_count, graph.edges)
        stream = list(range(graph.vertex_count))
        if limit is not None:
            stream = stream[:limit]
        digest = _reference_digest(kind, path, {"limit": limit},
                                   graph.vertex_count)
        return ResolvedInstance(label, oracle, stream, digest)
    if kind in ("kmedoid", "logdet"):
        recorded = dict(params)
        metric = _take(params, "metric", "haversine")
        if kind == "kmedoid":
            anchor = _take(params, "anchor", 0)
            points = _load_point_array(path, params)
            if params:
                raise ValueError(f"unknown kmedoid parameters: "
                                 f"{sorted(params)}")
            oracle = KMedoidOracle(points, metric=metric, anchor=anchor)
        else:
            alpha = config.alpha if config.alpha is not None \
                else _take(params, "alpha", 10.0)
            bandwidth = config.bandwidth if config.bandwidth is not None \
                else _take(params, "bandwidth")
            points = _load_point_array(path, params)
            if params:
                raise ValueError(f"unknown logdet parameters: "
                                 f"{sorted(params)}")
            oracle = LogDetOracle(points, bandwidth=bandwidth, alpha=alpha,
                                  metric=metric)
        stream = list(range(len(points)))
        digest = _reference_digest(kind, path, recorded, len(points))
        return ResolvedInstance(label, oracle, stream, digest)
    if kind == "recommendation":
        user_file = _take(params, "user")
        if user_file is None:
            raise ValueError("recommendation instances need a user=<csv> "
                             "parameter")
        mix = _take(params, "mix", 0.95)
        limit = _take(params, "limit")
        if params:
            raise ValueError(f"unknown recommendation parameters: "
                             f"{sorted(params)}")
        movies = load_feature_matrix(path)
        user = load_feature_matrix(_resolve_data_path(str(user_file)))
        movie_rows = np.asarray(movies.rows, dtype=float)
        if limit is not None:
            movie_rows = movie_rows[:limit]
        oracle = RecommendationOracle(movie_rows,
                                      np.asarray(user.rows[0], dtype=float),
                                      mix=mix)
        stream = list(range(len(movie_rows)))
        digest = _reference_digest(kind, path,
                                   {"user": str(user_file), "mix": mix,
                                    "limit": limit}, len(movie_rows))
        return ResolvedInstance(label, oracle, stream, digest)
    raise ValueError(f"unknown dataset kind {kind!r}")


def resolve_instance(text: str, config: RunConfig) -> ResolvedInstance:
    """Turn an instance reference string into an oracle and a stream."""
    head, sep, rest = text.partition(":")
    if sep and head in GENERATORS:
        spec = generate(head, parse_kv_params(rest))
        oracle, stream = spec.materialize()
        return ResolvedInstance(text, oracle, stream, spec.digest(),
                                pinned_k=spec.pinned_k)
    if sep and head in DATASET_KINDS:
        return _resolve_dataset(head, rest, config)
    path = Path(text)
    if path.exists():
        spec = InstanceSpec.from_json(path.read_text())
        oracle, stream = spec.materialize()
        return ResolvedInstance(text, oracle, stream, spec.digest(),
                                pinned_k=spec.pinned_k)
    raise ValueError(
        f"cannot resolve instance {text!r}: not a generator "
        f"({', '.join(sorted(GENERATORS))}), dataset kind "
        f"({', '.join(DATASET_KINDS)}), or existing instance JSON path")


def resolve_k(requested: int | None, pinned: int | None,
              default: int = 20) -> int:
    if requested is not None and pinned is not None and requested != pinned:
        raise ValueError(f"instance pins k={pinned} but k={requested} was "
                         f"requested")
    if requested is not None:
        return requested
    if pinned is not None:
        return pinned
    return default


def _run_one(algo_name: str, oracle, stream, k: int, eps: float, beta: float,
             out_dir: str, digest: str,
             ref_values: list[float] | None) -> dict:
    """Run one algorithm over the stream and write its trace files."""
    algorithm = make_algorithm(algo_name, oracle, k, eps=eps, beta=beta)
    started = time.perf_counter()
    algorithm.fit(stream)
    wall = time.perf_counter() - started
    trace = algorithm.trace_
    trace.params["instance"] = digest
    bound = algorithm.consistency_bound
    violations = validate_trace(trace, k, bound)
    if violations:
        t, msg = violations[0]
        raise ContractViolationError(
            f"{algo_name} trace violates its contract at step {t}: {msg}")
    out = Path(out_dir)
    base = f"{algo_name}__{digest[:8]}"
    csv_path = out / f"{base}.csv"
    write_trace_csv(trace, csv_path, ref_values=ref_values)
    write_trace_json(trace, out / f"{base}.json")
    return {
        "algorithm": algo_name,
        "final_value": trace.final_value(),
        "cumulative_additions": trace.cumulative_additions(),
        "total_oracle_calls": trace.total_oracle_calls(),
        "wall_time_s": wall,
        "trace_csv": str(csv_path),
        "trace_json": str(out / f"{base}.json"),
    }


def _brute_reference(oracle, stream, k: int, cap: int) -> list[float]:
    """Per-prefix exact optima; the guard checks the largest prefix first."""
    n = len(stream)
    total = 0
    for m in range(1, min(k, n) + 1):
        total += math.comb(n, m)
        if total > cap:
            raise ResourceLimitError(
                f"brute-force reference over {n} elements enumerates more "
                f"than {cap} subsets of size <= {min(k, n)} (cap {cap})")
    values = []
    for t in range(1, n + 1):
        _, opt = brute_force_opt(oracle, stream[:t], k, cap=cap)
        values.append(opt)
    return values


def run(config: RunConfig) -> dict:
    """Execute the configured runs and write traces plus a summary JSON."""
    for name in config.algorithms:
        if name not in ALGORITHMS:
            known = ", ".join(sorted(ALGORITHMS))
            raise ValueError(f"unknown algorithm {name!r}; known: {known}")
    if config.reference not in ("none", "brute", "greedy"):
        raise ValueError(f"reference must be none, brute, or greedy, "
                         f"got {config.reference!r}")
    resolved = resolve_instance(config.instance, config)
    k = resolve_k(config.k, resolved.pinned_k)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    ref_values = None
    reference: dict = {"kind": config.reference}
    if config.reference == "brute":
        ref_values = _brute_reference(resolved.oracle, resolved.stream, k,
                                      config.brute_cap)
        reference["final_optimum"] = ref_values[-1]
    elif config.reference == "greedy":
        greedy_solution = offline_greedy(resolved.oracle, resolved.stream, k)
        reference["offline_greedy_final"] = resolved.oracle.value(
            greedy_solution.ids())
        reference["note"] = ("offline greedy on the full stream; a weaker "
                             "stand-in for the optimum on instances too "
                             "large for brute force")

    tasks = [(name, resolved.oracle, resolved.stream, k, config.eps,
              config.beta, str(out), resolved.digest, ref_values)
             for name in config.algorithms]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_one_star, tasks))
    else:
        results = [_run_one(*task) for task in tasks]

    summary = {
        "instance": resolved.label,
        "instance_hash": resolved.digest,
        "k": k,
        "eps": config.eps,
        "beta": config.beta,
        "stream_length": len(resolved.stream),
        "reference": reference,
        "algorithms": {r["algorithm"]: {key: val for key, val in r.items()
                                        if key != "algorithm"}
                       for r in results},
    }
    atomic_write_text(out / "summary.json",
                      json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _run_one_star(task: tuple) -> dict:
    return _run_one(*task)


# -- trace comparison ---------------------------------------------------------

@dataclass
class ComparisonRow:
    algorithm: str
    final_value: float
    value_ratio: float
    cumulative_additions: int
    additions_ratio: float
    total_oracle_calls: int


def compare(paths: list) -> list[ComparisonRow]:
    """Side-by-side stats for traces of one instance at one k.

    value_ratio is each algorithm's final value over the best final value;
    additions_ratio is each algorithm's cumulative additions over the
    smallest cumulative additions.
    """
    if not paths:
        raise ValueError("compare needs at least one trace CSV")
    loaded = []
    for path in paths:
        meta, rows = read_trace_csv(path)
        if not rows:
            raise ValueError(f"trace CSV {path} has no steps")
        params = meta.get("params") or {}
        digest = params.get("instance") if isinstance(params, dict) else None
        loaded.append((str(path), meta, rows, digest))
    _, first_meta, _, first_digest = loaded[0]
    for path, meta, _, digest in loaded[1:]:
        if digest != first_digest:
            raise ValueError(
                f"traces cover different instances: {loaded[0][0]} has hash "
                f"{first_digest} but {path} has hash {digest}")
        if meta.get("k") != first_meta.get("k"):
            raise ValueError(
                f"traces use different k: {loaded[0][0]} has k="
                f"{first_meta.get('k')} but {path} has k={meta.get('k')}")
    stats = []
    for path, meta, rows, _ in loaded:
        final = rows[-1]["value"]
        adds = rows[-1]["cumulative_additions"]
        calls = sum(row["oracle_calls"] for row in rows)
        stats.append((meta.get("algorithm", Path(path).stem), final, adds,
                      calls))
    best_value = max(s[1] for s in stats)
    min_adds = min(s[2] for s in stats)
    table = []
    for name, final, adds, calls in stats:
        if final == best_value:
            value_ratio = 1.0
        else:
            value_ratio = final / best_value if best_value > 0 else 0.0
        if adds == min_adds:
            additions_ratio = 1.0
        else:
            additions_ratio = adds / min_adds if min_adds > 0 else math.inf
        table.append(ComparisonRow(name, final, value_ratio, adds,
                                   additions_ratio, calls))
    return table


COMPARE_COLUMNS = ("algorithm", "final_value", "value_ratio",
                   "cumulative_additions", "additions_ratio",
                   "total_oracle_calls")


def comparison_text(rows: list[ComparisonRow]) -> str:
    """Aligned fixed-width table."""
    grid = [COMPARE_COLUMNS]
    for row in rows:
        grid.append((row.algorithm, f"{row.final_value:.6g}",
                     f"{row.value_ratio:.4f}",
                     str(row.cumulative_additions),
                     f"{row.additions_ratio:.4f}",
                     str(row.total_oracle_calls)))
    widths = [max(len(line[i]) for line in grid) for i in range(len(grid[0]))]
    out = []
    for line in grid:
        out.append("  ".join(cell.ljust(widths[i])
                             for i, cell in enumerate(line)).rstrip())
    return "\n".join(out)


def comparison_csv(rows: list[ComparisonRow]) -> str:
    lines = [",".join(COMPARE_COLUMNS)]
    for row in rows:
        lines.append(",".join([row.algorithm, repr(row.final_value),
                               repr(row.value_ratio),
                               str(row.cumulative_additions),
                               repr(row.additions_ratio),
                               str(row.total_oracle_calls)]))
    return "\n".join(lines) + "\n"
