"""Deterministic instance generators and the adaptive lower-bound adversary.

Every generator returns an InstanceSpec: a self-contained, JSON-serializable
description of the oracle and the arrival order. Regenerating a spec from the
same (name, params) yields a bit-identical serialization.
"""

from __future__ import annotations

import hashlib
import json
import math
import operator
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .algorithms import StreamingMaximizer, make_algorithm
from .core import ContractViolationError, RunTrace, ValueOracle
from .oracles import ModularOracle, WeightedCoverageOracle


@dataclass
class InstanceSpec:
    """Declarative description of a benchmark instance.

    ``stream`` is the arrival order of element ids; None means ids 0..n-1 in
    order. ``oracle_spec`` holds everything needed to rebuild the oracle.
    """

    name: str
    params: dict
    oracle_spec: dict
    stream: list[int] | None = None

    @property
    def pinned_k(self) -> int | None:
        k = self.params.get("k")
        return None if k is None else operator.index(k)

    def build_oracle(self) -> ValueOracle:
        spec = self.oracle_spec
        kind = spec.get("kind")
        if kind == "weighted-coverage":
            return WeightedCoverageOracle(spec["item_weights"],
                                          spec["element_items"])
        if kind == "modular":
            return ModularOracle(spec["weights"])
        raise ValueError(f"unknown oracle kind {kind!r} in instance "
                         f"{self.name!r}")

    def materialize(self) -> tuple[ValueOracle, list[int]]:
        """Rebuild the oracle and the explicit arrival order."""
        oracle = self.build_oracle()
        if self.stream is None:
            stream = list(range(oracle.ground_size))
        else:
            stream = list(self.stream)
        return oracle, stream

    def to_json(self) -> str:
        doc = {"name": self.name, "params": self.params,
               "oracle": self.oracle_spec, "stream": self.stream}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        doc = json.loads(text)
        for key in ("name", "params", "oracle"):
            if key not in doc:
                raise ValueError(f"instance document lacks the {key!r} field")
        return cls(name=doc["name"], params=doc["params"],
                   oracle_spec=doc["oracle"], stream=doc.get("stream"))

    def digest(self) -> str:
        """Content hash identifying the instance across runs."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


# -- hard instance for the swapping baseline ----------------------------------

def _check_fraction(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return delta


def gen_swapping_hard(i: int, delta: float) -> InstanceSpec:
    """Weighted-coverage stream on which swapping stalls at half the scale.

    With k = 2^i, items form bundles j = 0..i of k items each, worth 2^j
    apiece except the last bundle, worth 2^i - delta. Block j of the stream
    delivers the k covering singletons of bundle j and then (for j < i) one
    element covering the whole bundle. Swapping ends holding the bundle i-1
    singletons: the final bundle's singletons fall short of the 2x swap rule
    by delta.
    """
    i = operator.index(i)
    if i < 1:
        raise ValueError(f"i must be at least 1, got {i}")
    delta = _check_fraction(delta)
    k = 2 ** i
    item_weights: list[float] = []
    for j in range(i + 1):
        weight = 2.0 ** i - delta if j == i else float(2 ** j)
        item_weights.extend([weight] * k)
    element_items: list[list[int]] = []
    for j in range(i + 1):
        for slot in range(k):
            element_items.append([j * k + slot])
        if j < i:
            element_items.append(list(range(j * k, (j + 1) * k)))
    return InstanceSpec(
        name="swapping-hard",
        params={"i": i, "delta": delta, "k": k},
        oracle_spec={"kind": "weighted-coverage",
                     "item_weights": item_weights,
                     "element_items": element_items})


def swapping_hard_singleton_ids(i: int, j: int) -> list[int]:
    """Element ids of bundle j's covering singletons, in arrival order."""
    k = 2 ** i
    if not 0 <= j <= i:
        raise ValueError(f"bundle index {j} outside 0..{i}")
    base = j * (k + 1)
    return list(range(base, base + k))


def swapping_hard_bundle_id(i: int, j: int) -> int:
    """Element id of the element covering all of bundle j (j < i only)."""
    if not 0 <= j < i:
        raise ValueError(f"bundle elements exist for j in 0..{i - 1}, got {j}")
    k = 2 ** i
    return j * (k + 1) + k


def swapping_hard_strong_solution(i: int) -> list[int]:
    """A feasible k-subset achieving the instance's closed-form high value.

    Takes every whole-bundle element plus k - i singletons of the last
    bundle; its value is k(2^i - 1) + (k - i)(2^i - delta).
    """
    k = 2 ** i
    bundles = [swapping_hard_bundle_id(i, j) for j in range(i)]
    return bundles + swapping_hard_singleton_ids(i, i)[:k - i]


# -- instability of offline greedy ---------------------------------------------

def gen_greedy_instability(i: int, delta: float, k: int) -> InstanceSpec:
    """Row/column coverage stream whose per-prefix optima churn completely.

    Items form an (i+1) x (i+1) grid with tie-breaking weights
    w(0,0) = 0, w(a,0) = delta(2a+1), w(0,b) = 2b*delta, and 1 elsewhere.
    Element C_b covers column b, R_a covers row a, and the stream alternates
    C_1, R_1, ..., C_i, R_i, so after each new row the best k-subset flips
    between the last k columns and the last k rows.
    """
    i = operator.index(i)
    if i < 2:
        raise ValueError(f"i must be at least 2, got {i}")
    delta = _check_fraction(delta)
    k = operator.index(k)
    if not 1 <= k <= i:
        raise ValueError(f"k must lie in 1..{i} for full alternation, got {k}")
    side = i + 1

    def item(a: int, b: int) -> int:
        return a * side + b

    item_weights = [1.0] * (side * side)
    item_weights[item(0, 0)] = 0.0
    for a in range(1, side):
        item_weights[item(a, 0)] = delta * (2 * a + 1)
    for b in range(1, side):
        item_weights[item(0, b)] = 2.0 * b * delta
    element_items: list[list[int]] = []
    for step in range(1, i + 1):
        element_items.append([item(a, step) for a in range(side)])  # C_step
        element_items.append([item(step, b) for b in range(side)])  # R_step
    return InstanceSpec(
        name="greedy-instability",
        params={"i": i, "delta": delta, "k": k},
        oracle_spec={"kind": "weighted-coverage",
                     "item_weights": item_weights,
                     "element_items": element_items})


def greedy_instability_layout(i: int) -> tuple[dict[int, int], dict[int, int]]:
    """Maps column index b -> element id and row index a -> element id."""
    cols = {b: 2 * (b - 1) for b in range(1, i + 1)}
    rows = {a: 2 * (a - 1) + 1 for a in range(1, i + 1)}
    return cols, rows


# -- instability of the threshold sieve ----------------------------------------

def gen_sieve_instability(n: int, mode: str, k: int) -> InstanceSpec:
    """Additive stream with geometrically exploding weights.

    doubling: element t (1-based) is worth 2^t; blockwise: k^ceil(t/k), so
    each block of k arrivals dwarfs everything before it.
    """
    n = operator.index(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    k = operator.index(k)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if mode == "doubling":
        if n > 900:
            raise ValueError(f"doubling weights overflow doubles beyond "
                             f"n = 900, got {n}")
        weights = [2.0 ** t for t in range(1, n + 1)]
    elif mode == "blockwise":
        top = math.ceil(n / k) * math.log2(k) if k > 1 else 0.0
        if top > 900.0:
            raise ValueError(f"blockwise weights overflow doubles: "
                             f"k^ceil(n/k) needs {top:.0f} bits")
        weights = [float(k) ** math.ceil(t / k) for t in range(1, n + 1)]
    else:
        raise ValueError(f"mode must be 'doubling' or 'blockwise', "
                         f"got {mode!r}")
    return InstanceSpec(
        name="sieve-instability",
        params={"n": n, "mode": mode, "k": k},
        oracle_spec={"kind": "modular", "weights": weights})


# -- adaptive lower-bound adversary --------------------------------------------

class _AdaptiveCoverageOracle(ValueOracle):
    """Unit-weight coverage over 2k items, with one element defined mid-run.

    Elements 0..2k-1 each cover their own item. Element 2k's item set is
    filled in by the adversary after watching the algorithm, strictly before
    that element is first evaluated, so every query ever issued sees fixed
    data.
    """

    def __init__(self, k: int):
        self._k = k
        self._items: dict[int, frozenset[int]] = {
            e: frozenset((e,)) for e in range(2 * k)}

    @property
    def ground_size(self) -> int:
        return 2 * self._k + 1

    def define(self, element: int, items: Iterable[int]) -> None:
        if element in self._items:
            raise ValueError(f"element {element} is already defined")
        self._items[element] = frozenset(items)

    def value(self, S: Iterable[int]) -> float:
        ids = list(S)
        self._check_ids(ids)
        covered: set[int] = set()
        for e in ids:
            try:
                covered |= self._items[e]
            except KeyError:
                raise ValueError(f"element {e} is not defined yet") from None
        return float(len(covered))


def adaptive_lower_bound_adversary(
        algorithm: StreamingMaximizer | str, k: int,
        **algorithm_params) -> tuple[RunTrace, float]:
    """Drive an algorithm into the consistency lower bound and report the gap.

    Feeds 2k unit singletons, reads the solution, then feeds one element
    covering the solution's items plus the smallest-index uncovered items up
    to k total. The optimum after that step is 2k-1 in closed form; returns
    the trace and (2k-1) / f(final solution). A solution exceeding k elements
    raises ContractViolationError.
    """
    k = operator.index(k)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    oracle = _AdaptiveCoverageOracle(k)
    if isinstance(algorithm, str):
        algorithm = make_algorithm(algorithm, oracle, k, **algorithm_params)
    else:
        algorithm.set_params(oracle=oracle, k=k)
    algorithm.reset()
    for e in range(2 * k):
        algorithm.partial_fit(e)
        if len(algorithm.solution_) > k:
            raise ContractViolationError(
                f"{algorithm.name} reported {len(algorithm.solution_)} "
                f"elements at step {e + 1} with k = {k}")
    covered = sorted(algorithm.solution_.ids())
    uncovered = [g for g in range(2 * k) if g not in set(covered)]
    adversarial = covered + uncovered[:k - len(covered)]
    oracle.define(2 * k, adversarial)
    algorithm.partial_fit(2 * k)
    if len(algorithm.solution_) > k:
        raise ContractViolationError(
            f"{algorithm.name} reported {len(algorithm.solution_)} elements "
            f"after the adversarial step with k = {k}")
    optimum = 2.0 * k - 1.0
    final = algorithm.trace_.steps[-1].value
    ratio = math.inf if final <= 0.0 else optimum / final
    return algorithm.trace_, ratio


GENERATORS: dict[str, Callable[..., InstanceSpec]] = {
    "swapping-hard": gen_swapping_hard,
    "greedy-instability": gen_greedy_instability,
    "sieve-instability": gen_sieve_instability,
}


def generate(name: str, params: dict) -> InstanceSpec:
    """Dispatch to a registered generator by its instance name."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        known = ", ".join(sorted(GENERATORS))
        raise ValueError(f"unknown generator {name!r}; known: {known}") from None
    accepted = {"swapping-hard": ("i", "delta"),
                "greedy-instability": ("i", "delta", "k"),
                "sieve-instability": ("n", "mode", "k")}[name]
    missing = [key for key in accepted if key not in params]
    if missing:
        raise ValueError(f"generator {name!r} needs parameters {missing}")
    spec = gen(**{key: params[key] for key in accepted})
    # Tolerate derived values (e.g. a pinned k) as long as they agree.
    for key, value in params.items():
        if key in accepted:
            continue
        if spec.params.get(key) != value:
            raise ValueError(f"parameter {key}={value!r} does not match "
                             f"generator {name!r}")
    return spec
