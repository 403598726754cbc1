"""Objective oracles: frozen hand values, naive cross-checks, and properties.

Each oracle's expected numbers here were derived independently (hand
enumeration or a naive reference formula) before being frozen into asserts.
"""

import math
import random

import numpy as np
import pytest

from submodstream.core import (CallCounter, NumericError, ResourceLimitError,
                               check_oracle, marginal)
from submodstream.oracles import (EARTH_RADIUS_M, DominatingOracle,
                                  KMedoidOracle, LogDetOracle, ModularOracle,
                                  RecommendationOracle,
                                  WeightedCoverageOracle, haversine_m)

TOL = 1e-9


def naive_coverage(weights, element_items, S):
    covered = set()
    for e in S:
        covered.update(element_items[e])
    return sum(weights[i] for i in covered)


def naive_kmedoid(points, anchor, S):
    points = np.asarray(points, dtype=float)

    def loss(ids):
        total = 0.0
        for p in points:
            total += min(np.linalg.norm(p - points[i]) for i in ids)
        return total / len(points)

    return loss([anchor]) - loss(sorted(set(S) | {anchor}))


def naive_logdet(oracle, S):
    """Reference value via numpy's LU-based determinant."""
    M = oracle.kernel_matrix(list(S))
    sign, logdet = np.linalg.slogdet(M)
    assert sign > 0
    return logdet


class TestWeightedCoverage:
    def test_empty_is_zero(self):
        oracle = WeightedCoverageOracle([1.0], [[0]])
        assert oracle.value(()) == 0.0

    def test_two_element_marginal(self):
        # u covers {a}, v covers {a, b}: v's marginal on {u} is item b alone
        oracle = WeightedCoverageOracle([1.0, 1.0], [[0], [0, 1]])
        assert marginal(oracle, 1, [0]) == 1.0

    def test_three_item_hand_enumeration(self):
        # weights (1,2,3); u={0,1}, v={1,2} cover everything: 1+2+3 = 6
        oracle = WeightedCoverageOracle([1.0, 2.0, 3.0], [[0, 1], [1, 2]])
        assert oracle.value([0, 1]) == 6.0

    def test_matches_naive_on_random_instances(self):
        rng = random.Random(4)
        for _ in range(30):
            items = rng.randint(1, 8)
            weights = [rng.randint(0, 10) / 2.0 for _ in range(items)]
            cover = [sorted(rng.sample(range(items),
                                       rng.randint(0, items)))
                     for _ in range(rng.randint(1, 10))]
            oracle = WeightedCoverageOracle(weights, cover)
            S = rng.sample(range(len(cover)), rng.randint(0, len(cover)))
            assert oracle.value(S) == pytest.approx(
                naive_coverage(weights, cover, S), abs=TOL)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            WeightedCoverageOracle([-1.0], [[0]])

    def test_out_of_range_item_rejected(self):
        with pytest.raises(ValueError):
            WeightedCoverageOracle([1.0], [[1]])

    def test_unknown_element_rejected(self):
        oracle = WeightedCoverageOracle([1.0], [[0]])
        with pytest.raises(ValueError):
            oracle.value([3])

    def test_item_count(self):
        oracle = WeightedCoverageOracle([1.0, 2.0], [[0]])
        assert oracle.item_count == 2


class TestDominating:
    def test_empty_is_zero(self):
        oracle = DominatingOracle(3, [(0, 1)])
        assert oracle.value(()) == 0.0

    def test_star_center_counts_leaves_only(self):
        # no self-coverage: the center dominates exactly its neighbors
        oracle = DominatingOracle(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        assert oracle.value([0]) == 4.0
        assert oracle.degree(0) == 4

    def test_triangle_single_vertex(self):
        oracle = DominatingOracle(3, [(0, 1), (1, 2), (2, 0)])
        assert oracle.value([0]) == 2.0

    def test_self_loop_adds_self_coverage(self):
        oracle = DominatingOracle(2, [(0, 0)])
        assert oracle.value([0]) == 1.0
        assert oracle.value([1]) == 0.0

    def test_path_values(self):
        oracle = DominatingOracle(3, [(0, 1), (1, 2)])
        assert oracle.value([0]) == 1.0
        assert oracle.value([1]) == 2.0
        # 0 and 2 both dominate only the middle vertex
        assert oracle.value([0, 2]) == 1.0
        assert oracle.value([0, 1, 2]) == 3.0

    def test_duplicate_edges_merge(self):
        oracle = DominatingOracle(2, [(0, 1), (1, 0), (0, 1)])
        assert oracle.value([0]) == 1.0


class TestModular:
    def test_sum_of_weights(self):
        oracle = ModularOracle([1.5, 2.0, 4.0])
        assert oracle.value([0, 2]) == 5.5

    def test_marginal_is_weight_regardless_of_base(self):
        oracle = ModularOracle([1.5, 2.0, 4.0])
        assert marginal(oracle, 1, []) == 2.0
        assert marginal(oracle, 1, [0, 2]) == 2.0

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ModularOracle([1.0, -0.5])


class TestKMedoid:
    def test_empty_and_anchor_are_zero(self):
        oracle = KMedoidOracle(np.array([[0.0], [1.0], [2.0]]),
                               metric="euclidean", anchor=0)
        assert oracle.value(()) == 0.0
        assert oracle.value([0]) == 0.0

    def test_collinear_hand_value(self):
        # points 0,1,2 on a line, anchor 0: L({0}) = 1, L({0,2}) = 1/3
        oracle = KMedoidOracle(np.array([[0.0], [1.0], [2.0]]),
                               metric="euclidean", anchor=0)
        assert oracle.value([2]) == pytest.approx(2.0 / 3.0, abs=TOL)

    def test_matches_naive_on_random_sets(self):
        rng = random.Random(9)
        points = np.array([[rng.random() * 3, rng.random() * 3]
                           for _ in range(10)])
        oracle = KMedoidOracle(points, metric="euclidean", anchor=2)
        for _ in range(25):
            S = rng.sample(range(10), rng.randint(0, 6))
            assert oracle.value(S) == pytest.approx(
                naive_kmedoid(points, 2, S), abs=1e-8)

    def test_haversine_metric_scales_to_meters(self):
        # a quarter of the equator
        points = np.array([[0.0, 0.0], [0.0, 90.0]])
        oracle = KMedoidOracle(points, metric="haversine", anchor=0)
        quarter = math.pi / 2 * EARTH_RADIUS_M
        assert oracle.value([1]) == pytest.approx(quarter / 2, rel=1e-12)

    def test_empty_point_set_rejected(self):
        with pytest.raises(ValueError):
            KMedoidOracle(np.empty((0, 2)), metric="euclidean")

    def test_bad_anchor_rejected(self):
        with pytest.raises(ValueError):
            KMedoidOracle(np.array([[0.0, 0.0]]), anchor=5)

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            KMedoidOracle(np.array([[0.0, 0.0]]), metric="manhattan")


class TestHaversine:
    def test_same_point_is_zero(self):
        assert haversine_m(48.85, 2.35, 48.85, 2.35) == 0.0

    def test_quarter_equator(self):
        expected = math.pi / 2 * EARTH_RADIUS_M
        assert haversine_m(0.0, 0.0, 0.0, 90.0) == pytest.approx(
            expected, rel=1e-12)

    def test_antipodal_is_half_circumference(self):
        expected = math.pi * EARTH_RADIUS_M
        assert haversine_m(0.0, 0.0, 0.0, 180.0) == pytest.approx(
            expected, rel=1e-9)

    def test_symmetry(self):
        d1 = haversine_m(40.4, -3.7, 52.5, 13.4)
        d2 = haversine_m(52.5, 13.4, 40.4, -3.7)
        assert d1 == pytest.approx(d2, rel=1e-15)


class TestLogDet:
    def line_oracle(self, n=5, spacing=1.0, **kwargs):
        points = np.array([[i * spacing, 0.0] for i in range(n)])
        return LogDetOracle(points, metric="euclidean", **kwargs)

    def test_empty_is_zero(self):
        assert self.line_oracle(bandwidth=1.0).value(()) == 0.0

    def test_singleton_unit_diagonal(self):
        oracle = self.line_oracle(bandwidth=1.0, alpha=10.0)
        assert oracle.value([0]) == pytest.approx(math.log(11.0), abs=TOL)

    def test_two_identical_points(self):
        oracle = LogDetOracle(np.zeros((2, 2)), bandwidth=1.0, alpha=10.0)
        # det [[11,10],[10,11]] = 21 by hand
        assert oracle.value([0, 1]) == pytest.approx(math.log(21.0), abs=TOL)

    def test_permutation_invariance(self):
        oracle = self.line_oracle(bandwidth=2.0)
        assert oracle.value([0, 2, 4]) == oracle.value([4, 0, 2])
        assert oracle.value([0, 2, 4]) == oracle.value([2, 4, 0])

    def test_duplicate_point_gains_less_than_distant_point(self):
        # 5 points on a line, two of them coincident: the duplicate's
        # marginal is positive (regularized kernel) but strictly below a
        # genuinely distant point's marginal
        points = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0],
                           [3.0, 0.0]])
        oracle = LogDetOracle(points, bandwidth=1.0, alpha=10.0)
        base = [0]
        dup_gain = marginal(oracle, 1, base)
        far_gain = marginal(oracle, 4, base)
        assert 0.0 < dup_gain < far_gain

    def test_matches_naive_determinant(self):
        rng = random.Random(12)
        for _ in range(25):
            pts = np.array([[rng.random() * 4, rng.random() * 4]
                            for _ in range(10)])
            oracle = LogDetOracle(pts, alpha=10.0, metric="euclidean")
            size = rng.randint(1, 8)
            S = rng.sample(range(10), size)
            assert oracle.value(S) == pytest.approx(
                naive_logdet(oracle, S), rel=1e-8)

    def test_max_set_size_cap(self):
        oracle = self.line_oracle(n=6, bandwidth=1.0, max_set_size=3)
        with pytest.raises(ResourceLimitError):
            oracle.value([0, 1, 2, 3])
        ev = oracle.evaluator()
        for e in (0, 1, 2):
            ev.add(e)
        with pytest.raises(ResourceLimitError):
            ev.gain(3)

    def test_median_bandwidth_is_deterministic(self):
        pts = np.array([[i * 1.0, 0.0] for i in range(8)])
        h1 = LogDetOracle(pts, metric="euclidean").bandwidth
        h2 = LogDetOracle(pts, metric="euclidean").bandwidth
        assert h1 == h2 > 0

    def test_bad_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            self.line_oracle(bandwidth=0.0)

    def test_bad_alpha_rejected(self):
        with pytest.raises(ValueError):
            self.line_oracle(bandwidth=1.0, alpha=0.0)

    def test_numeric_error_carries_pivot(self):
        from submodstream.oracles import _cholesky_logdet
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
        with pytest.raises(NumericError) as exc_info:
            _cholesky_logdet(bad)
        assert exc_info.value.pivot == 1


class TestRecommendation:
    def test_empty_is_zero(self):
        oracle = RecommendationOracle(np.array([[1.0, 0.0]]),
                                      np.array([1.0, 0.0]))
        assert oracle.value(()) == 0.0

    def test_single_unit_movie(self):
        # both terms contribute 1 at mix 0.95: 0.05*1 + 0.95*1
        oracle = RecommendationOracle(np.array([[1.0, 0.0]]),
                                      np.array([1.0, 0.0]), mix=0.95)
        assert oracle.value([0]) == pytest.approx(1.0, abs=TOL)

    def test_mix_zero_is_sum_of_user_scores(self):
        movies = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 2.0]])
        user = np.array([2.0, 1.0])
        oracle = RecommendationOracle(movies, user, mix=0.0)
        assert oracle.value([0, 2]) == pytest.approx(2.0 + 2.0, abs=TOL)

    def test_mix_one_is_facility_location(self):
        movies = np.array([[1.0, 0.0], [0.0, 1.0]])
        user = np.array([1.0, 1.0])
        oracle = RecommendationOracle(movies, user, mix=1.0)
        # each movie's best similarity with S = {0}: <m0,m0>=1, <m1,m0>=0
        assert oracle.value([0]) == pytest.approx(1.0, abs=TOL)
        assert oracle.value([0, 1]) == pytest.approx(2.0, abs=TOL)

    def test_direct_formula_on_random_data(self):
        rng = random.Random(21)
        movies = np.array([[rng.random() for _ in range(4)]
                           for _ in range(8)])
        user = np.array([rng.random() for _ in range(4)])
        mix = 0.95
        oracle = RecommendationOracle(movies, user, mix=mix)
        for _ in range(20):
            S = rng.sample(range(8), rng.randint(0, 8))
            if S:
                linear = sum(max(float(movies[s] @ user), 0.0) for s in S)
                facility = sum(max(float(movies[m] @ movies[s]) for s in S)
                               for m in range(8))
            else:
                linear = facility = 0.0
            expected = (1 - mix) * linear + mix * facility
            assert oracle.value(S) == pytest.approx(expected, abs=1e-9)

    def test_negative_entries_clamped(self):
        oracle = RecommendationOracle(np.array([[-1.0, 1.0]]),
                                      np.array([1.0, -2.0]))
        # clamped vectors: movie (0,1), user (1,0). The user term vanishes;
        # the facility term keeps the movie's self-similarity of 1.
        assert oracle.value([0]) == pytest.approx(0.95, abs=TOL)

    def test_mix_outside_range_rejected(self):
        with pytest.raises(ValueError):
            RecommendationOracle(np.array([[1.0]]), np.array([1.0]), mix=1.5)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            RecommendationOracle(np.array([[1.0, 0.0]]), np.array([1.0]))


def oracle_zoo(rng):
    """One modest instance of each oracle family."""
    points = np.array([[rng.random() * 2, rng.random() * 2]
                       for _ in range(12)])
    feats = np.array([[rng.random() for _ in range(5)] for _ in range(10)])
    user = np.array([rng.random() for _ in range(5)])
    edges = set()
    while len(edges) < 14:
        u, v = rng.randrange(10), rng.randrange(10)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return {
        "coverage": WeightedCoverageOracle(
            [rng.randint(0, 6) / 2.0 for _ in range(9)],
            [sorted(rng.sample(range(9), rng.randint(0, 5)))
             for _ in range(11)]),
        "dominating": DominatingOracle(10, sorted(edges)),
        "modular": ModularOracle([rng.random() * 3 for _ in range(10)]),
        "kmedoid": KMedoidOracle(points, metric="euclidean"),
        "logdet": LogDetOracle(points, alpha=10.0, metric="euclidean"),
        "recommendation": RecommendationOracle(feats, user),
    }


@pytest.mark.parametrize("name", ["coverage", "dominating", "modular",
                                  "kmedoid", "logdet", "recommendation"])
def test_sampled_monotone_submodular(name):
    oracle = oracle_zoo(random.Random(31))[name]
    assert check_oracle(oracle, random.Random(7), triples=300) == []


@pytest.mark.parametrize("name", ["coverage", "dominating", "modular",
                                  "kmedoid", "logdet", "recommendation"])
def test_incremental_matches_scratch_under_churn(name):
    """Interleaved adds and removes stay on the from-scratch value."""
    oracle = oracle_zoo(random.Random(32))[name]
    rng = random.Random(13)
    counter = CallCounter()
    ev = oracle.evaluator(counter)
    members = []
    for _ in range(250):
        if members and rng.random() < 0.4:
            x = rng.choice(members)
            ev.remove(x)
            members.remove(x)
        else:
            outside = [e for e in range(oracle.ground_size)
                       if e not in members]
            if not outside:
                continue
            x = rng.choice(outside)
            ev.gain(x)
            ev.add(x)
            members.append(x)
        reference = oracle.value(members)
        assert ev.value == pytest.approx(reference, rel=1e-10, abs=1e-10)
        assert ev.members() == members
    assert counter.count > 0


@pytest.mark.parametrize("name", ["coverage", "dominating", "modular",
                                  "kmedoid", "logdet", "recommendation"])
def test_removal_gains_match_direct_marginals(name):
    oracle = oracle_zoo(random.Random(33))[name]
    rng = random.Random(17)
    S = rng.sample(range(oracle.ground_size), 5)
    ev = oracle.evaluator().seed(S)
    base = oracle.value(S)
    for r, g in zip(ev.members(), ev.removal_gains()):
        rest = [e for e in S if e != r]
        assert g == pytest.approx(base - oracle.value(rest),
                                  rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", ["coverage", "dominating", "modular",
                                  "kmedoid", "recommendation"])
def test_value_is_permutation_invariant(name):
    oracle = oracle_zoo(random.Random(34))[name]
    rng = random.Random(19)
    S = rng.sample(range(oracle.ground_size), 6)
    reference = oracle.value(S)
    for _ in range(5):
        rng.shuffle(S)
        assert oracle.value(S) == reference
