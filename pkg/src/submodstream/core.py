"""Element, oracle, and trace abstractions shared by all algorithms.

Objective values are double-precision reals and every threshold comparison in
the algorithms uses plain ``>=`` with no epsilon slack, so traces are
reproducible bit-for-bit across runs.
"""

from __future__ import annotations

import json
import operator
import os
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence


class NumericError(ArithmeticError):
    """Numeric failure inside an oracle, e.g. a factorization that breaks down.

    ``pivot`` carries the offending pivot index when a factorization fails.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a configured resource cap."""


class ContractViolationError(RuntimeError):
    """An algorithm under test broke a promised guarantee (e.g. feasibility)."""


def _as_id(e) -> int:
    ident = operator.index(e)
    if ident < 0:
        raise ValueError(f"element ids are non-negative, got {ident}")
    return ident


class ElementSet:
    """Ordered set of element ids; insertion order is preserved.

    Order is part of the semantics, not a convenience: Encompassing-Set evicts
    the oldest solution element and Min-Swap breaks ties by earliest insertion.
    Equality compares membership only.
    """

    __slots__ = ("_members",)

    def __init__(self, ids: Iterable[int] = ()):
        self._members: dict[int, None] = {}
        for e in ids:
            self.add(e)

    def add(self, e: int) -> None:
        e = _as_id(e)
        if e in self._members:
            raise ValueError(f"duplicate element id {e}")
        self._members[e] = None

    def discard(self, e: int) -> None:
        self._members.pop(e, None)

    def remove(self, e: int) -> None:
        if e not in self._members:
            raise ValueError(f"element id {e} not in set")
        del self._members[e]

    def ids(self) -> list[int]:
        return list(self._members)

    def oldest(self) -> int:
        if not self._members:
            raise ValueError("empty set has no oldest element")
        return next(iter(self._members))

    def copy(self) -> "ElementSet":
        out = ElementSet()
        out._members = dict(self._members)
        return out

    def __contains__(self, e) -> bool:
        return e in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __bool__(self) -> bool:
        return bool(self._members)

    def __eq__(self, other) -> bool:
        if isinstance(other, ElementSet):
            return self._members.keys() == other._members.keys()
        if isinstance(other, (set, frozenset)):
            return set(self._members) == other
        return NotImplemented

    def __repr__(self) -> str:
        return f"ElementSet({self.ids()!r})"


class CallCounter:
    """Counts oracle evaluations charged to one run."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n


class ValueOracle(ABC):
    """Monotone, normalized, submodular set function behind a value oracle.

    Implementations must be deterministic (equal sets give bit-identical
    values) and immutable after construction so they can be shared across
    concurrent runs.
    """

    @property
    @abstractmethod
    def ground_size(self) -> int:
        """Number of elements the oracle is defined over."""

    @abstractmethod
    def value(self, S: Iterable[int]) -> float:
        """f(S) for a duplicate-free collection of element ids."""

    def evaluator(self, counter: CallCounter | None = None) -> "SetEvaluator":
        """Fresh per-run incremental evaluator mirroring one mutable set."""
        return GenericEvaluator(self, counter)

    def _check_ids(self, ids: Sequence[int]) -> None:
        n = self.ground_size
        for e in ids:
            if not 0 <= e < n:
                raise ValueError(f"unknown element id {e} (ground size {n})")


class SetEvaluator:
    """Per-run mutable mirror of one set with incremental value queries.

    ``gain(x)`` prices one oracle call and returns f(x|S); a following
    ``add(x)`` commits it for free. ``remove`` and ``removal_gain`` each price
    one call. Evaluators are single-owner and never shared between runs.
    """

    def __init__(self, oracle: ValueOracle, counter: CallCounter | None = None):
        self.oracle = oracle
        self.counter = counter if counter is not None else CallCounter()
        self.value = 0.0
        self._members: list[int] = []
        self._member_set: set[int] = set()
        self._pending: tuple | None = None

    # -- bookkeeping ------------------------------------------------------

    def members(self) -> list[int]:
        return list(self._members)

    def __contains__(self, e) -> bool:
        return e in self._member_set

    def __len__(self) -> int:
        return len(self._members)

    def _charge(self, n: int = 1) -> None:
        self.counter.add(n)

    def seed(self, initial: Iterable[int]) -> "SetEvaluator":
        ids = [_as_id(e) for e in initial]
        if len(set(ids)) != len(ids):
            raise ValueError("seed set contains duplicates")
        self._members = ids
        self._member_set = set(ids)
        self._pending = None
        if ids:
            self._charge(1)
        self.value = self._seed_value()
        return self

    # -- queries and mutations --------------------------------------------

    def gain(self, x: int) -> float:
        """f(x | S); exactly 0.0 for members, costing nothing."""
        if x in self._member_set:
            return 0.0
        self._charge(1)
        g, aux = self._gain(x)
        self._pending = (x, g, aux)
        return g

    def add(self, x: int) -> None:
        if x in self._member_set:
            raise ValueError(f"duplicate element id {x}")
        if self._pending is not None and self._pending[0] == x:
            _, g, aux = self._pending
        else:
            self._charge(1)
            g, aux = self._gain(x)
        self._apply_add(x, aux)
        self._members.append(x)
        self._member_set.add(x)
        self.value += g
        self._pending = None

    def remove(self, x: int) -> None:
        if x not in self._member_set:
            raise ValueError(f"element id {x} not in set")
        self._charge(1)
        lost = self._apply_remove(x)
        self._members.remove(x)
        self._member_set.remove(x)
        self.value -= lost
        self._pending = None

    def removal_gain(self, r: int) -> float:
        """f(r | S - r) for a member r."""
        if r not in self._member_set:
            return self.gain(r)
        self._charge(1)
        return self._removal_gain(r)

    def removal_gains(self) -> list[float]:
        """f(r | S - r) for every member, aligned with members() order."""
        return [self.removal_gain(r) for r in self._members]

    # -- implementation hooks ---------------------------------------------

    def _seed_value(self) -> float:
        raise NotImplementedError

    def _gain(self, x: int) -> tuple[float, object]:
        raise NotImplementedError

    def _apply_add(self, x: int, aux) -> None:
        raise NotImplementedError

    def _apply_remove(self, x: int) -> float:
        """Update structure for removal of x and return the value lost."""
        raise NotImplementedError

    def _removal_gain(self, r: int) -> float:
        raise NotImplementedError


class GenericEvaluator(SetEvaluator):
    """From-scratch fallback evaluator; correct for any oracle."""

    def _seed_value(self) -> float:
        return self.oracle.value(self._members)

    def _gain(self, x):
        return self.oracle.value(self._members + [x]) - self.value, None

    def _apply_add(self, x, aux):
        pass

    def _apply_remove(self, x):
        rest = [e for e in self._members if e != x]
        return self.value - self.oracle.value(rest)

    def _removal_gain(self, r):
        rest = [e for e in self._members if e != r]
        return self.value - self.oracle.value(rest)


def marginal(oracle: ValueOracle, x: int, S: Iterable[int]) -> float:
    """f(S + x) - f(S); exactly 0 when x is already in S."""
    ids = S.ids() if isinstance(S, ElementSet) else list(S)
    if x in ids:
        return 0.0
    return oracle.value(ids + [x]) - oracle.value(ids)


def change_counts(prev: Iterable[int], next_: Iterable[int]) -> tuple[int, int]:
    """(additions, removals) between two solution snapshots."""
    a = set(prev)
    b = set(next_)
    return len(b - a), len(a - b)


@dataclass(frozen=True)
class StepRecord:
    """Per-insertion snapshot of one algorithm's maintained solution."""

    t: int
    solution: tuple[int, ...]
    value: float
    additions: int
    removals: int
    oracle_calls: int
    elapsed_ns: int


@dataclass
class RunTrace:
    """Sequence of StepRecords for one (algorithm, instance) run."""

    algorithm: str
    k: int
    params: dict = field(default_factory=dict)
    steps: list[StepRecord] = field(default_factory=list)

    def final_value(self) -> float:
        return self.steps[-1].value if self.steps else 0.0

    def cumulative_additions(self) -> int:
        return sum(s.additions for s in self.steps)

    def total_oracle_calls(self) -> int:
        return sum(s.oracle_calls for s in self.steps)


def validate_trace(trace: RunTrace, k: int, C: float) -> list[tuple[int, str]]:
    """Steps violating feasibility (|solution| <= k) or C-consistency.

    An empty list certifies that the trace is feasible and C-consistent.
    """
    violations = []
    for step in trace.steps:
        if len(step.solution) > k:
            violations.append((step.t, f"solution size {len(step.solution)} > k={k}"))
        if step.additions > C:
            violations.append((step.t, f"additions {step.additions} > C={C}"))
    return violations


# -- trace serialization ----------------------------------------------------

TRACE_FIELDS = ("t", "value", "additions", "removals", "cumulative_additions",
                "oracle_calls", "elapsed_ns")


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_line(trace: RunTrace) -> str:
    params = json.dumps(trace.params, sort_keys=True, separators=(",", ":"))
    return f"# algorithm={trace.algorithm} k={trace.k} params={params}"


def write_trace_csv(trace: RunTrace, path: Path | str,
                    ref_values: Sequence[float] | None = None) -> None:
    """One row per step in the fixed field order, after a '#' metadata line.

    ``ref_values`` appends a trailing ref_value column (per-step reference
    optimum) when given; it must align with the steps.
    """
    if ref_values is not None and len(ref_values) != len(trace.steps):
        raise ValueError("ref_values length does not match trace length")
    fields = TRACE_FIELDS + (("ref_value",) if ref_values is not None else ())
    lines = [_meta_line(trace), ",".join(fields)]
    cumulative = 0
    for i, s in enumerate(trace.steps):
        cumulative += s.additions
        row = [str(s.t), repr(s.value), str(s.additions), str(s.removals),
               str(cumulative), str(s.oracle_calls), str(s.elapsed_ns)]
        if ref_values is not None:
            row.append(repr(float(ref_values[i])))
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_trace_json(trace: RunTrace, path: Path | str) -> None:
    """Full trace including per-step solution sets."""
    doc = {
        "algorithm": trace.algorithm,
        "k": trace.k,
        "params": trace.params,
        "steps": [
            {"t": s.t, "solution": list(s.solution), "value": s.value,
             "additions": s.additions, "removals": s.removals,
             "oracle_calls": s.oracle_calls, "elapsed_ns": s.elapsed_ns}
            for s in trace.steps
        ],
    }
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_trace_csv(path: Path | str) -> tuple[dict, list[dict]]:
    """(metadata, rows) from a trace CSV; '#' lines feed the metadata dict."""
    meta: dict = {}
    rows: list[dict] = []
    header: list[str] | None = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, val = token.partition("=")
                        meta[key] = val
                continue
            if header is None:
                header = line.split(",")
                missing = [f for f in TRACE_FIELDS if f not in header]
                if missing:
                    raise ValueError(f"trace CSV {path} is missing column(s): "
                                     + ", ".join(missing))
                continue
            parts = line.split(",")
            row = dict(zip(header, parts))
            for key in ("t", "additions", "removals", "cumulative_additions",
                        "oracle_calls", "elapsed_ns"):
                row[key] = int(row[key])
            row["value"] = float(row["value"])
            if "ref_value" in row:
                row["ref_value"] = float(row["ref_value"])
            rows.append(row)
    if header is None:
        raise ValueError(f"trace CSV {path} is empty")
    if "params" in meta:
        try:
            meta["params"] = json.loads(meta["params"])
        except json.JSONDecodeError:
            pass
    return meta, rows


# -- sampled oracle property suite ------------------------------------------

def check_oracle(oracle: ValueOracle, rng, triples: int = 1000,
                 tol: float = 1e-9, max_set_size: int | None = None) -> list[str]:
    """Sampled monotonicity/submodularity check; empty result means pass.

    Each trial draws X subset of Y and e outside Y, then requires
    f(e|X) >= f(e|Y) - tol (diminishing returns) and f(e|Y) >= -tol
    (monotonicity). eval(empty) must be exactly 0.
    """
    problems: list[str] = []
    if oracle.value(()) != 0.0:
        problems.append(f"eval(empty) = {oracle.value(())!r}, expected 0.0")
    n = oracle.ground_size
    if n < 2:
        return problems
    cap = n - 1 if max_set_size is None else min(max_set_size, n - 1)
    ground = list(range(n))
    for trial in range(triples):
        size_y = rng.randint(0, cap)
        picked = rng.sample(ground, size_y + 1)
        e = picked[-1]
        Y = picked[:-1]
        X = [v for v in Y if rng.random() < 0.5]
        gain_x = marginal(oracle, e, X)
        gain_y = marginal(oracle, e, Y)
        if gain_y < -tol:
            problems.append(
                f"trial {trial}: monotonicity violated, f({e}|Y)={gain_y!r}")
        if gain_x < gain_y - tol:
            problems.append(
                f"trial {trial}: submodularity violated, "
                f"f({e}|X)={gain_x!r} < f({e}|Y)={gain_y!r}")
        if len(problems) > 20:
            problems.append("... aborting after 20 problems")
            break
    return problems
