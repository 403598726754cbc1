"""Streaming selection algorithms and offline reference solvers.

Each streaming algorithm consumes one element per ``partial_fit`` call (or a
whole stream via ``fit``), maintains a feasible solution of at most k
elements, and appends a StepRecord per insertion to ``trace_``. All threshold
tests use plain ``>=`` on doubles, so runs are bit-reproducible.
"""

from __future__ import annotations

import itertools
import math
import operator
import time
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator

from .core import (CallCounter, ElementSet, ResourceLimitError, RunTrace,
                   StepRecord, ValueOracle, change_counts)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


def swap_budget(eps: float) -> int:
    """Inner-swap budget N = ceil((1/eps) * log_phi(12/eps))."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return math.ceil((1.0 / eps) * (math.log(12.0 / eps) / math.log(GOLDEN_RATIO)))


class StreamingMaximizer(BaseEstimator):
    """Base class for the streaming algorithms.

    Subclasses implement ``_setup`` and ``_step`` against the per-run
    evaluator machinery. Fitted attributes: ``solution_`` (the maintained
    ElementSet), ``trace_`` (RunTrace), ``counter_`` (oracle-call counter).
    Elements may arrive at most once; duplicates raise ValueError.
    """

    name = "streaming-maximizer"
    consistency_bound: float = math.inf

    def __init__(self, oracle: ValueOracle, k: int = 20):
        self.oracle = oracle
        self.k = k

    def _trace_params(self) -> dict:
        return {}

    def _validate(self) -> None:
        if operator.index(self.k) < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")

    def reset(self) -> "StreamingMaximizer":
        """Drop all fitted state; the next partial_fit starts a new run."""
        self._validate()
        self.solution_ = ElementSet()
        self.counter_ = CallCounter()
        self.trace_ = RunTrace(algorithm=self.name, k=self.k,
                               params=self._trace_params())
        self._seen: set[int] = set()
        self._t = 0
        self._snapshot: tuple[int, ...] = ()
        self._setup()
        return self

    def fit(self, stream: Iterable[int], y=None) -> "StreamingMaximizer":
        """Run the whole stream from a fresh state."""
        self.reset()
        for e in stream:
            self.partial_fit(e)
        return self

    def partial_fit(self, e: int) -> "StreamingMaximizer":
        """Feed one element; initializes state on the first call."""
        if not hasattr(self, "trace_"):
            self.reset()
        e = operator.index(e)
        if e in self._seen:
            raise ValueError(f"element {e} was already inserted")
        self._seen.add(e)
        self._t += 1
        calls_before = self.counter_.count
        started = time.perf_counter_ns()
        self._step(e)
        elapsed = time.perf_counter_ns() - started
        reported = self._reported_solution()
        adds, removals = change_counts(self._snapshot, reported)
        self.trace_.steps.append(StepRecord(
            t=self._t, solution=reported, value=self._reported_value(),
            additions=adds, removals=removals,
            oracle_calls=self.counter_.count - calls_before,
            elapsed_ns=elapsed))
        self._snapshot = reported
        return self

    # -- subclass hooks ----------------------------------------------------

    def _setup(self) -> None:
        raise NotImplementedError

    def _step(self, e: int) -> None:
        raise NotImplementedError

    def _reported_solution(self) -> tuple[int, ...]:
        return tuple(self.solution_.ids())

    def _reported_value(self) -> float:
        raise NotImplementedError


def _min_swap_inplace(ev, solution: ElementSet, x: int, k: int):
    """Add x, evicting the argmin-marginal member when at capacity.

    Ties break toward the earliest-inserted member. Returns the eviction
    record (removed id, its marginal f(r|S-r), f(S) before the swap) or None
    when the set was below capacity.
    """
    if len(solution) < k:
        ev.gain(x)
        ev.add(x)
        solution.add(x)
        return None
    value_before = ev.value
    gains = ev.removal_gains()
    members = ev.members()
    best = 0
    for i in range(1, len(gains)):
        if gains[i] < gains[best]:
            best = i
    removed = members[best]
    ev.remove(removed)
    solution.remove(removed)
    ev.gain(x)
    ev.add(x)
    solution.add(x)
    return removed, gains[best], value_before


def is_local_optimum(oracle: ValueOracle, solution: ElementSet | Iterable[int],
                     arrived: Iterable[int], k: int) -> bool:
    """True when no arrived element clears the swap threshold.

    A solution S is locally optimal when no x among the arrived elements has
    f(x|S) >= (phi/k) f(S) with f(x|S) > 0; elements already in S contribute
    zero marginal and never disqualify it.
    """
    ids = solution.ids() if isinstance(solution, ElementSet) else list(solution)
    base = oracle.value(ids)
    thresh = (GOLDEN_RATIO / k) * base
    member = set(ids)
    for x in arrived:
        if x in member:
            continue
        g = oracle.value(ids + [x]) - base
        if g > 0.0 and g >= thresh:
            return False
    return True


def min_swap(S: ElementSet | Iterable[int], x: int, oracle: ValueOracle,
             k: int, counter: CallCounter | None = None) -> ElementSet:
    """Return S+x below capacity, else S-r+x for the min-marginal member r.

    The evicted r attains min over S of f(r|S-r) (ties by earliest insertion)
    and always satisfies f(r|S-r) <= f(S)/k by submodularity.
    """
    solution = S.copy() if isinstance(S, ElementSet) else ElementSet(S)
    if x in solution:
        raise ValueError(f"element {x} is already in the solution")
    ev = oracle.evaluator(counter).seed(solution.ids())
    _min_swap_inplace(ev, solution, x, k)
    return solution


class EncompassingSet(StreamingMaximizer):
    """Threshold-grown benchmark set with a sliding last-k solution window.

    An arriving element joins the benchmark B when f(e|B) >= (beta/k) f(B);
    the solution is always the most recent min(k, |B|) benchmark elements, so
    each accepted step adds one element and evicts at most the oldest.

    Parameters
    ----------
    oracle : ValueOracle
    k : cardinality constraint (default 20)
    beta : acceptance threshold parameter (default 1.14)
    """

    name = "encompassing-set"
    consistency_bound = 1

    def __init__(self, oracle: ValueOracle, k: int = 20, beta: float = 1.14):
        super().__init__(oracle, k)
        self.beta = beta

    def _trace_params(self):
        return {"beta": self.beta}

    def _validate(self):
        super()._validate()
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")

    def _setup(self):
        self.benchmark_ = ElementSet()
        self._bench_eval = self.oracle.evaluator(self.counter_)
        self._sol_eval = self.oracle.evaluator(self.counter_)

    @property
    def benchmark_value_(self) -> float:
        return self._bench_eval.value

    def _step(self, e):
        g = self._bench_eval.gain(e)
        if g >= (self.beta / self.k) * self._bench_eval.value:
            self._bench_eval.add(e)
            self.benchmark_.add(e)
            self._sol_eval.gain(e)
            self._sol_eval.add(e)
            self.solution_.add(e)
            if len(self.solution_) == self.k + 1:
                oldest = self.solution_.oldest()
                self._sol_eval.remove(oldest)
                self.solution_.remove(oldest)

    def _reported_value(self):
        return self._sol_eval.value


class ChasingLocalOpt(StreamingMaximizer):
    """Swap-based chase toward a (phi/k)-threshold local optimum.

    An arriving element with f(e|S) >= (phi/k) f(S) is swapped in via
    min-swap; afterwards up to N inner iterations re-scan all arrived
    elements in arrival order and swap in the first one whose marginal
    clears the same threshold and is strictly positive. N is
    ceil((1/eps) log_phi(12/eps)), 100 at the default eps = 0.1.
    """

    name = "chasing-local-opt"

    def __init__(self, oracle: ValueOracle, k: int = 20, eps: float = 0.1):
        super().__init__(oracle, k)
        self.eps = eps

    @property
    def consistency_bound(self) -> int:
        return swap_budget(self.eps) + 1

    def _trace_params(self):
        return {"eps": self.eps, "phi": GOLDEN_RATIO,
                "N": swap_budget(self.eps)}

    def _validate(self):
        super()._validate()
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")

    def _setup(self):
        self.swap_budget_ = swap_budget(self.eps)
        self.arrived_: list[int] = []
        self._sol_eval = self.oracle.evaluator(self.counter_)
        self.swap_records_: list[tuple[int, int, float, float]] = []
        # Certifies "no arrived element clears the threshold" for the current
        # solution; stays valid while the solution and its value are unchanged,
        # because a rejected arrival was screened by that same threshold.
        self._locally_optimal = False

    def _threshold(self) -> float:
        return (GOLDEN_RATIO / self.k) * self._sol_eval.value

    def _swap_in(self, x):
        evicted = _min_swap_inplace(self._sol_eval, self.solution_, x, self.k)
        if evicted is not None:
            removed, removal_gain, value_before = evicted
            self.swap_records_.append((self._t, removed, removal_gain,
                                       value_before))
        self._locally_optimal = False

    def _step(self, e):
        self.arrived_.append(e)
        if self._sol_eval.gain(e) >= self._threshold():
            self._swap_in(e)
        if self._locally_optimal:
            return
        for _ in range(self.swap_budget_):
            found = None
            thresh = self._threshold()
            for x in self.arrived_:
                if x in self.solution_:
                    continue
                g = self._sol_eval.gain(x)
                if g > 0.0 and g >= thresh:
                    found = x
                    break
            if found is None:
                self._locally_optimal = True
                break
            self._swap_in(found)

    def is_local_optimum(self) -> bool:
        """No arrived element has positive marginal >= (phi/k) f(S)."""
        return is_local_optimum(self.oracle, self.solution_, self.arrived_,
                                self.k)

    def _reported_value(self):
        return self._sol_eval.value


class Swapping(StreamingMaximizer):
    """Weight-frozen swapping baseline.

    Each arrival freezes w(e) = f(e|S). Below capacity e is added; at
    capacity the member s with the smallest frozen weight (ties earliest)
    is replaced iff 2 w(s) <= w(e).
    """

    name = "swapping"
    consistency_bound = 1

    def __init__(self, oracle: ValueOracle, k: int = 20):
        super().__init__(oracle, k)

    def _setup(self):
        self._sol_eval = self.oracle.evaluator(self.counter_)
        self.stored_weights_: dict[int, float] = {}

    def _step(self, e):
        w = self._sol_eval.gain(e)
        self.stored_weights_[e] = w
        if len(self.solution_) < self.k:
            self._sol_eval.add(e)
            self.solution_.add(e)
            return
        members = self._sol_eval.members()
        cheapest = members[0]
        for s in members[1:]:
            if self.stored_weights_[s] < self.stored_weights_[cheapest]:
                cheapest = s
        if 2.0 * self.stored_weights_[cheapest] <= w:
            self._sol_eval.remove(cheapest)
            self.solution_.remove(cheapest)
            self._sol_eval.gain(e)
            self._sol_eval.add(e)
            self.solution_.add(e)

    def _reported_value(self):
        return self._sol_eval.value


class SieveStreaming(StreamingMaximizer):
    """Classic threshold-sieve baseline; a (2+eps)-approximation, not consistent.

    Maintains one candidate set per active threshold (1+eps)^j within
    [m, 2km] for the running max singleton m; an element joins a candidate
    S_v with room when f(e|S_v) >= (v/2 - f(S_v)) / (k - |S_v|). The reported
    solution is the best candidate, ties toward the smaller threshold, and may
    change wholesale between steps.
    """

    name = "sieve-streaming"
    consistency_bound = math.inf

    def __init__(self, oracle: ValueOracle, k: int = 20, eps: float = 0.1):
        super().__init__(oracle, k)
        self.eps = eps

    def _trace_params(self):
        return {"eps": self.eps}

    def _validate(self):
        super()._validate()
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")

    def _setup(self):
        self.max_singleton_ = 0.0
        self._candidates: dict[int, object] = {}

    def _refresh_window(self):
        m = self.max_singleton_
        log_base = math.log1p(self.eps)
        j_min = math.ceil(math.log(m) / log_base)
        j_max = math.floor(math.log(2.0 * self.k * m) / log_base)
        for j in list(self._candidates):
            if not j_min <= j <= j_max:
                del self._candidates[j]
        for j in range(j_min, j_max + 1):
            if j not in self._candidates:
                self._candidates[j] = self.oracle.evaluator(self.counter_)

    def active_thresholds(self) -> list[float]:
        return [(1.0 + self.eps) ** j for j in sorted(self._candidates)]

    def _step(self, e):
        self.counter_.add(1)
        singleton = self.oracle.value((e,))
        if singleton > self.max_singleton_:
            self.max_singleton_ = singleton
        if self.max_singleton_ > 0.0:
            self._refresh_window()
        for j in sorted(self._candidates):
            ev = self._candidates[j]
            room = self.k - len(ev)
            if room <= 0:
                continue
            v = (1.0 + self.eps) ** j
            if ev.gain(e) >= (v / 2.0 - ev.value) / room:
                ev.add(e)
        best = self._best_candidate()
        self.solution_ = ElementSet(best.members()) if best is not None \
            else ElementSet()

    def _best_candidate(self):
        best = None
        for j in sorted(self._candidates):
            ev = self._candidates[j]
            if best is None or ev.value > best.value:
                best = ev
        return best

    def _reported_value(self):
        best = self._best_candidate()
        return best.value if best is not None else 0.0


# -- offline references -------------------------------------------------------

def offline_greedy(oracle: ValueOracle, ground: Iterable[int], k: int,
                   counter: CallCounter | None = None) -> ElementSet:
    """k-step argmax-marginal greedy over the ground set, ties to smallest id."""
    ids = sorted(set(operator.index(e) for e in ground))
    solution = ElementSet()
    ev = oracle.evaluator(counter)
    for _ in range(min(k, len(ids))):
        best = None
        best_gain = -math.inf
        for e in ids:
            if e in solution:
                continue
            g = ev.gain(e)
            if g > best_gain:
                best = e
                best_gain = g
        ev.add(best)
        solution.add(best)
    return solution


def brute_force_opt(oracle: ValueOracle, ground: Iterable[int], k: int,
                    cap: int = 10 ** 6,
                    counter: CallCounter | None = None) -> tuple[ElementSet, float]:
    """Exact maximizer over all subsets of size <= k by enumeration.

    Guarded by the subset cap; sizes ascend and only strict improvements
    replace the incumbent, so ties resolve to the smallest, earliest subset.
    """
    ids = sorted(set(operator.index(e) for e in ground))
    size = min(k, len(ids))
    total = 0
    for m in range(1, size + 1):
        total += math.comb(len(ids), m)
        if total > cap:
            raise ResourceLimitError(
                f"brute force over {len(ids)} elements enumerates more than "
                f"{cap} subsets of size <= {size} (cap {cap})")
    best_set: tuple[int, ...] = ()
    best_value = 0.0
    evaluations = 0
    for m in range(1, size + 1):
        for combo in itertools.combinations(ids, m):
            value = oracle.value(combo)
            evaluations += 1
            if value > best_value:
                best_set = combo
                best_value = value
    if counter is not None:
        counter.add(evaluations)
    return ElementSet(best_set), best_value


class OfflineGreedyReplay(StreamingMaximizer):
    """Reference pseudo-stream: rerun offline greedy on every prefix."""

    name = "offline-greedy"
    consistency_bound = math.inf

    def _setup(self):
        self.arrived_: list[int] = []
        self._value = 0.0

    def _step(self, e):
        self.arrived_.append(e)
        self.solution_ = offline_greedy(self.oracle, self.arrived_, self.k,
                                        counter=self.counter_)
        self.counter_.add(1)
        self._value = self.oracle.value(self.solution_.ids())

    def _reported_value(self):
        return self._value


class BruteForceReplay(StreamingMaximizer):
    """Reference pseudo-stream: exact optimum recomputed on every prefix."""

    name = "brute-force"
    consistency_bound = math.inf

    def __init__(self, oracle: ValueOracle, k: int = 20, cap: int = 10 ** 6):
        super().__init__(oracle, k)
        self.cap = cap

    def _setup(self):
        self.arrived_: list[int] = []
        self._value = 0.0

    def _step(self, e):
        self.arrived_.append(e)
        self.solution_, self._value = brute_force_opt(
            self.oracle, self.arrived_, self.k, cap=self.cap,
            counter=self.counter_)

    def _reported_value(self):
        return self._value


ALGORITHMS: dict[str, type[StreamingMaximizer]] = {
    EncompassingSet.name: EncompassingSet,
    ChasingLocalOpt.name: ChasingLocalOpt,
    Swapping.name: Swapping,
    SieveStreaming.name: SieveStreaming,
    OfflineGreedyReplay.name: OfflineGreedyReplay,
    BruteForceReplay.name: BruteForceReplay,
}

STREAMING_ALGORITHMS = (EncompassingSet.name, ChasingLocalOpt.name,
                        Swapping.name, SieveStreaming.name)


def make_algorithm(name: str, oracle: ValueOracle, k: int,
                   eps: float = 0.1, beta: float = 1.14) -> StreamingMaximizer:
    """Instantiate a registered algorithm with the parameters it accepts."""
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        known = ", ".join(sorted(ALGORITHMS))
        raise ValueError(f"unknown algorithm {name!r}; known: {known}") from None
    kwargs = {}
    if name in (ChasingLocalOpt.name, SieveStreaming.name):
        kwargs["eps"] = eps
    if name == EncompassingSet.name:
        kwargs["beta"] = beta
    return cls(oracle, k=k, **kwargs)
