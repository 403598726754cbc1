"""Monotone submodular objectives scored by the streaming algorithms.

Every oracle is immutable after construction, normalized (f(empty) = 0), and
deterministic: eval of equal sets is bit-identical regardless of insertion
order, which the evaluators' canonical (sorted) reductions guarantee.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .core import (CallCounter, NumericError, ResourceLimitError, SetEvaluator,
                   ValueOracle)

# Mean Earth radius in meters, pinned so geodesic values reproduce bit-for-bit.
EARTH_RADIUS_M = 6_371_008.8


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two (degree) coordinates."""
    p1, l1, p2, l2 = map(math.radians, (lat1, lon1, lat2, lon2))
    a = (math.sin((p2 - p1) / 2.0) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin((l2 - l1) / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


class _PointGeometry:
    """Shared distance plumbing for the point-set oracles."""

    METRICS = ("euclidean", "haversine")

    def __init__(self, points, metric: str):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a non-empty 2-D coordinate array")
        if metric not in self.METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        if metric == "haversine":
            if pts.shape[1] != 2:
                raise ValueError("haversine points need (lat, lon) columns")
            self._lat = np.radians(pts[:, 0])
            self._lon = np.radians(pts[:, 1])
        self.points = pts
        self.metric = metric
        self.n = pts.shape[0]

    def distance_row(self, i: int) -> np.ndarray:
        """Distances from point i to every point, in point order."""
        if self.metric == "euclidean":
            diff = self.points - self.points[i]
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        s_lat = np.sin((self._lat - self._lat[i]) / 2.0) ** 2
        s_lon = np.sin((self._lon - self._lon[i]) / 2.0) ** 2
        a = s_lat + np.cos(self._lat[i]) * np.cos(self._lat) * s_lon
        return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))

    def pair_distances(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        if self.metric == "euclidean":
            diff = self.points[I] - self.points[J]
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        s_lat = np.sin((self._lat[I] - self._lat[J]) / 2.0) ** 2
        s_lon = np.sin((self._lon[I] - self._lon[J]) / 2.0) ** 2
        a = s_lat + np.cos(self._lat[I]) * np.cos(self._lat[J]) * s_lon
        return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


# -- weighted coverage -------------------------------------------------------

class _CountCoverEvaluator(SetEvaluator):
    """Covered-item accumulator with per-item multiplicities.

    Multiplicities make removal exact: an item stays covered until the last
    member covering it leaves, so a marginal costs O(|element_items(x)|).
    """

    def __init__(self, oracle, counter):
        super().__init__(oracle, counter)
        self._counts = np.zeros(oracle.item_count, dtype=np.int32)

    def _items(self, e):
        return self.oracle.element_items[e]

    def _seed_value(self):
        self._counts[:] = 0
        for e in self._members:
            self._counts[self._items(e)] += 1
        w = self.oracle.item_weights
        return float(w[self._counts > 0].sum())

    def _gain(self, x):
        items = self._items(x)
        fresh = items[self._counts[items] == 0]
        return float(self.oracle.item_weights[fresh].sum()), None

    def _apply_add(self, x, aux):
        self._counts[self._items(x)] += 1

    def _apply_remove(self, x):
        items = self._items(x)
        self._counts[items] -= 1
        dropped = items[self._counts[items] == 0]
        return float(self.oracle.item_weights[dropped].sum())

    def _removal_gain(self, r):
        items = self._items(r)
        solo = items[self._counts[items] == 1]
        return float(self.oracle.item_weights[solo].sum())


class WeightedCoverageOracle(ValueOracle):
    """f(S) = total weight of items covered by the union of S's item sets.

    Parameters
    ----------
    item_weights : sequence of non-negative reals, one per item.
    element_items : per element, the item indices it covers.
    """

    def __init__(self, item_weights: Sequence[float],
                 element_items: Sequence[Iterable[int]]):
        weights = np.asarray(item_weights, dtype=np.float64)
        if weights.ndim != 1:
            raise ValueError("item_weights must be one-dimensional")
        if weights.size and float(weights.min()) < 0.0:
            raise ValueError("item weights must be non-negative")
        table = []
        for items in element_items:
            arr = np.array(sorted(set(int(i) for i in items)), dtype=np.intp)
            if arr.size and (arr[0] < 0 or arr[-1] >= weights.size):
                raise ValueError(f"item index out of range in {arr}")
            table.append(arr)
        self.item_weights = weights
        self.element_items = table

    @property
    def ground_size(self) -> int:
        return len(self.element_items)

    @property
    def item_count(self) -> int:
        return self.item_weights.size

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        covered = np.zeros(self.item_count, dtype=bool)
        for e in ids:
            covered[self.element_items[e]] = True
        return float(self.item_weights[covered].sum())

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _CountCoverEvaluator(self, counter)


class DominatingOracle(ValueOracle):
    """f(S) = number of vertices adjacent to at least one vertex of S.

    A vertex does not cover itself unless the edge list contains a self loop.
    """

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]]):
        if vertex_count <= 0:
            raise ValueError("vertex_count must be positive")
        neighbors: list[set[int]] = [set() for _ in range(vertex_count)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
            neighbors[u].add(v)
            neighbors[v].add(u)
        self.item_weights = np.ones(vertex_count, dtype=np.float64)
        self.element_items = [np.array(sorted(s), dtype=np.intp)
                              for s in neighbors]

    @property
    def ground_size(self) -> int:
        return len(self.element_items)

    @property
    def item_count(self) -> int:
        return self.item_weights.size

    def degree(self, v: int) -> int:
        return int(self.element_items[v].size)

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        covered = np.zeros(self.item_count, dtype=bool)
        for e in ids:
            covered[self.element_items[e]] = True
        return float(np.count_nonzero(covered))

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _CountCoverEvaluator(self, counter)


# -- modular -----------------------------------------------------------------

class _ModularEvaluator(SetEvaluator):
    def _seed_value(self):
        return self.oracle.value(self._members)

    def _gain(self, x):
        return float(self.oracle.weights[x]), None

    def _apply_add(self, x, aux):
        pass

    def _apply_remove(self, x):
        return float(self.oracle.weights[x])

    def _removal_gain(self, r):
        return float(self.oracle.weights[r])


class ModularOracle(ValueOracle):
    """Additive objective: f(S) = sum of per-element weights."""

    def __init__(self, weights: Sequence[float]):
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if arr.size and float(arr.min()) < 0.0:
            raise ValueError("weights must be non-negative")
        self.weights = arr

    @property
    def ground_size(self) -> int:
        return self.weights.size

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        return float(self.weights[ids].sum())

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _ModularEvaluator(self, counter)


# -- k-medoid ----------------------------------------------------------------

class _KMedoidEvaluator(SetEvaluator):
    """Caches per-point current minima so a marginal costs O(|V|)."""

    def __init__(self, oracle, counter):
        super().__init__(oracle, counter)
        self._minima = oracle.anchor_row.copy()
        self._rows: dict[int, np.ndarray] = {}

    def _seed_value(self):
        self._rows = {e: self.oracle.geometry.distance_row(e)
                      for e in self._members}
        self._minima = self.oracle.anchor_row.copy()
        for row in self._rows.values():
            np.minimum(self._minima, row, out=self._minima)
        return self.oracle.anchor_loss - float(self._minima.mean())

    def _gain(self, x):
        row = self.oracle.geometry.distance_row(x)
        new_minima = np.minimum(self._minima, row)
        g = float(self._minima.mean()) - float(new_minima.mean())
        return g, (row, new_minima)

    def _apply_add(self, x, aux):
        if aux is None:
            row = self.oracle.geometry.distance_row(x)
            new_minima = np.minimum(self._minima, row)
        else:
            row, new_minima = aux
        self._rows[x] = row
        self._minima = new_minima

    def _rebuilt_minima(self, skip: int) -> np.ndarray:
        out = self.oracle.anchor_row.copy()
        for e in self._members:
            if e != skip:
                np.minimum(out, self._rows[e], out=out)
        return out

    def _apply_remove(self, x):
        new_minima = self._rebuilt_minima(skip=x)
        lost = float(new_minima.mean()) - float(self._minima.mean())
        del self._rows[x]
        self._minima = new_minima
        return lost

    def _removal_gain(self, r):
        without = self._rebuilt_minima(skip=r)
        return float(without.mean()) - float(self._minima.mean())

    def removal_gains(self):
        if not self._members:
            return []
        self._charge(len(self._members))
        stack = np.vstack([self.oracle.anchor_row]
                          + [self._rows[e] for e in self._members])
        low = np.argmin(stack, axis=0)
        masked = stack.copy()
        masked[low, np.arange(stack.shape[1])] = np.inf
        second = masked.min(axis=0)
        base = float(self._minima.mean())
        n = stack.shape[1]
        gains = []
        # Dropping row r leaves min(second, others) wherever r held the minimum.
        for pos in range(1, stack.shape[0]):
            held = low == pos
            without = np.where(held, second, self._minima)
            gains.append(float(without.mean()) - base)
        return gains


class KMedoidOracle(ValueOracle):
    """Reduction in mean distance to the nearest chosen point.

    With L(S) = (1/|V|) sum_v min_{e in S} d(e, v), the objective is
    f(S) = L({anchor}) - L(S + anchor), which is normalized, monotone, and
    submodular. Distances are meters for the haversine metric and unitless
    for Euclidean; the objective always scores against the full point set.
    """

    def __init__(self, points, metric: str = "euclidean", anchor: int = 0):
        self.geometry = _PointGeometry(points, metric)
        if not 0 <= anchor < self.geometry.n:
            raise ValueError(f"anchor {anchor} out of range")
        self.anchor = anchor
        self.anchor_row = self.geometry.distance_row(anchor)
        self.anchor_row.setflags(write=False)
        self.anchor_loss = float(self.anchor_row.mean())

    @property
    def ground_size(self) -> int:
        return self.geometry.n

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        minima = self.anchor_row.copy()
        for e in ids:
            np.minimum(minima, self.geometry.distance_row(e), out=minima)
        return self.anchor_loss - float(minima.mean())

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _KMedoidEvaluator(self, counter)


# -- log-determinant diversity ------------------------------------------------

def _cholesky_logdet(A: np.ndarray) -> float:
    """log det of a symmetric positive-definite matrix.

    Raises NumericError carrying the offending pivot index when the
    factorization meets a non-positive pivot.
    """
    m = A.shape[0]
    L = np.zeros_like(A)
    logdet = 0.0
    for j in range(m):
        d = A[j, j] - float(L[j, :j] @ L[j, :j])
        if not math.isfinite(d) or d <= 0.0:
            raise NumericError(
                f"matrix is not positive definite at pivot {j}", pivot=j)
        logdet += math.log(d)
        root = math.sqrt(d)
        L[j, j] = root
        if j + 1 < m:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / root
    return logdet


class _LogDetEvaluator(SetEvaluator):
    """Grows a Cholesky factor one row per insertion."""

    def __init__(self, oracle, counter):
        super().__init__(oracle, counter)
        self._L = np.zeros((0, 0))

    def _factor(self, ids: list[int]) -> tuple[np.ndarray, float]:
        A = self.oracle.kernel_matrix(ids)
        m = len(ids)
        L = np.zeros((m, m))
        value = 0.0
        for j in range(m):
            d = A[j, j] - float(L[j, :j] @ L[j, :j])
            if not math.isfinite(d) or d <= 0.0:
                raise NumericError(
                    f"matrix is not positive definite at pivot {j}", pivot=j)
            value += math.log(d)
            L[j, j] = math.sqrt(d)
            if j + 1 < m:
                L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
        return L, value

    def _seed_value(self):
        self._L, value = self._factor(self._members)
        return value

    def _extension(self, x):
        m = len(self._members)
        col = self.oracle.kernel_column(self._members, x)
        w = np.empty(m)
        for i in range(m):
            w[i] = (col[i] - float(self._L[i, :i] @ w[:i])) / self._L[i, i]
        d = (1.0 + self.oracle.alpha) - float(w @ w)
        if not math.isfinite(d) or d <= 0.0:
            raise NumericError(
                f"matrix is not positive definite at pivot {m}", pivot=m)
        return w, d

    def _gain(self, x):
        if len(self._members) >= self.oracle.max_set_size:
            raise ResourceLimitError(
                f"log-det solution size capped at {self.oracle.max_set_size}")
        w, d = self._extension(x)
        return math.log(d), (w, d)

    def _apply_add(self, x, aux):
        w, d = aux if aux is not None else self._extension(x)
        m = len(self._members)
        L = np.zeros((m + 1, m + 1))
        L[:m, :m] = self._L
        L[m, :m] = w
        L[m, m] = math.sqrt(d)
        self._L = L

    def _apply_remove(self, x):
        rest = [e for e in self._members if e != x]
        self._L, new_value = self._factor(rest)
        return self.value - new_value

    def _removal_gain(self, r):
        rest = [e for e in self._members if e != r]
        return self.value - self._factor(rest)[1]


class LogDetOracle(ValueOracle):
    """Diversity objective f(S) = log det(I + alpha * K_SS).

    Kernel entries are K_ij = exp(-d(i, j)^2 / h^2) with unit diagonal. The
    bandwidth defaults to the median pairwise distance over min(|V|^2, 10^6)
    sampled pairs (seeded, so the default is deterministic). Solution size is
    capped (default 64) to bound factorization cost.
    """

    PAIR_SAMPLE_CAP = 10 ** 6

    def __init__(self, points, bandwidth: float | None = None,
                 alpha: float = 10.0, metric: str = "euclidean",
                 max_set_size: int = 64):
        self.geometry = _PointGeometry(points, metric)
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if max_set_size < 1:
            raise ValueError("max_set_size must be at least 1")
        self.alpha = float(alpha)
        self.max_set_size = int(max_set_size)
        if bandwidth is None:
            bandwidth = self._median_pairwise_distance()
        if not bandwidth > 0.0:
            raise ValueError("bandwidth must be positive")
        self.bandwidth = float(bandwidth)

    def _median_pairwise_distance(self) -> float:
        n = self.geometry.n
        if n < 2:
            raise ValueError("bandwidth default needs at least 2 points")
        if n * n <= self.PAIR_SAMPLE_CAP:
            I, J = np.triu_indices(n, k=1)
        else:
            rng = np.random.default_rng(0)
            I = rng.integers(0, n, size=self.PAIR_SAMPLE_CAP)
            J = rng.integers(0, n, size=self.PAIR_SAMPLE_CAP)
            keep = I != J
            I, J = I[keep], J[keep]
        med = float(np.median(self.geometry.pair_distances(I, J)))
        if med <= 0.0:
            raise ValueError("median pairwise distance is zero; "
                             "pass an explicit bandwidth")
        return med

    @property
    def ground_size(self) -> int:
        return self.geometry.n

    def kernel_column(self, ids: list[int], x: int) -> np.ndarray:
        """alpha * K[ids, x] as a dense column."""
        if not ids:
            return np.zeros(0)
        d = self.geometry.pair_distances(np.asarray(ids, dtype=np.intp),
                                         np.full(len(ids), x, dtype=np.intp))
        return self.alpha * np.exp(-(d * d) / (self.bandwidth ** 2))

    def kernel_matrix(self, ids: list[int]) -> np.ndarray:
        """I + alpha * K restricted to ids, in the given order."""
        m = len(ids)
        A = np.empty((m, m))
        for a in range(m):
            col = self.kernel_column(ids, ids[a])
            A[:, a] = col
        A[np.diag_indices(m)] = 1.0 + self.alpha
        return A

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        if len(ids) > self.max_set_size:
            raise ResourceLimitError(
                f"log-det evaluation of {len(ids)} elements exceeds the "
                f"configured maximum {self.max_set_size}")
        if not ids:
            return 0.0
        return _cholesky_logdet(self.kernel_matrix(ids))

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _LogDetEvaluator(self, counter)


# -- recommendation (facility location + linear mixture) ----------------------

class _RecommendationEvaluator(SetEvaluator):
    """Per-movie best-score accumulator plus the linear user term."""

    def __init__(self, oracle, counter):
        super().__init__(oracle, counter)
        self._best = np.zeros(oracle.movie_count)
        self._rows: dict[int, np.ndarray] = {}

    def _seed_value(self):
        self._rows = {e: self.oracle.score_row(e) for e in self._members}
        self._best = np.zeros(self.oracle.movie_count)
        linear = 0.0
        for e in self._members:
            np.maximum(self._best, self._rows[e], out=self._best)
            linear += self.oracle.user_scores[e]
        a = self.oracle.mix
        return (1.0 - a) * linear + a * float(self._best.sum())

    def _gain(self, x):
        row = self.oracle.score_row(x)
        new_best = np.maximum(self._best, row)
        a = self.oracle.mix
        g = ((1.0 - a) * self.oracle.user_scores[x]
             + a * float((new_best - self._best).sum()))
        return g, (row, new_best)

    def _apply_add(self, x, aux):
        if aux is None:
            row = self.oracle.score_row(x)
            new_best = np.maximum(self._best, row)
        else:
            row, new_best = aux
        self._rows[x] = row
        self._best = new_best

    def _best_without(self, skip: int) -> np.ndarray:
        out = np.zeros(self.oracle.movie_count)
        for e in self._members:
            if e != skip:
                np.maximum(out, self._rows[e], out=out)
        return out

    def _apply_remove(self, x):
        without = self._best_without(x)
        a = self.oracle.mix
        lost = ((1.0 - a) * self.oracle.user_scores[x]
                + a * float((self._best - without).sum()))
        del self._rows[x]
        self._best = without
        return lost

    def _removal_gain(self, r):
        without = self._best_without(r)
        a = self.oracle.mix
        return ((1.0 - a) * self.oracle.user_scores[r]
                + a * float((self._best - without).sum()))


class RecommendationOracle(ValueOracle):
    """Mixture of predicted user affinity and facility-location coverage.

    f(S) = (1-mix) * sum_{s in S} max(<v_u, v_s>, 0)
         + mix * sum_{m in M} max_{s in S} <v_m, v_s>,
    with an empty max contributing 0 per movie so eval(empty) = 0. Feature
    vectors are clamped non-negative so both terms are monotone submodular.
    """

    def __init__(self, movie_vectors, user_vector, mix: float = 0.95):
        vecs = np.asarray(movie_vectors, dtype=np.float64)
        user = np.asarray(user_vector, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] == 0:
            raise ValueError("movie_vectors must be a non-empty 2-D array")
        if user.shape != (vecs.shape[1],):
            raise ValueError(
                f"user vector dimension {user.shape} does not match movie "
                f"dimension {vecs.shape[1]}")
        if not 0.0 <= mix <= 1.0:
            raise ValueError("mix must lie in [0, 1]")
        self.movie_vectors = np.maximum(vecs, 0.0)
        self.user_vector = np.maximum(user, 0.0)
        self.mix = float(mix)
        self.user_scores = np.maximum(self.movie_vectors @ self.user_vector, 0.0)

    @property
    def ground_size(self) -> int:
        return self.movie_vectors.shape[0]

    @property
    def movie_count(self) -> int:
        return self.movie_vectors.shape[0]

    def score_row(self, e: int) -> np.ndarray:
        """<v_m, v_e> for every movie m; non-negative by clamping."""
        return self.movie_vectors @ self.movie_vectors[e]

    def value(self, S: Iterable[int]) -> float:
        ids = sorted(S)
        self._check_ids(ids)
        if not ids:
            return 0.0
        best = np.zeros(self.movie_count)
        linear = 0.0
        for e in ids:
            np.maximum(best, self.score_row(e), out=best)
            linear += self.user_scores[e]
        return (1.0 - self.mix) * linear + self.mix * float(best.sum())

    def evaluator(self, counter: CallCounter | None = None) -> SetEvaluator:
        return _RecommendationEvaluator(self, counter)
