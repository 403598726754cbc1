"""Instance generators, serialized specs, and the adaptive adversary."""

import math

import pytest

from submodstream import (GOLDEN_RATIO, ContractViolationError,
                          EncompassingSet, InstanceSpec, SieveStreaming,
                          Swapping, adaptive_lower_bound_adversary,
                          brute_force_opt, generate, gen_greedy_instability,
                          gen_sieve_instability, gen_swapping_hard,
                          greedy_instability_layout, offline_greedy,
                          swapping_hard_bundle_id, swapping_hard_singleton_ids,
                          swapping_hard_strong_solution)
from submodstream.algorithms import StreamingMaximizer
from submodstream.generators import GENERATORS, _AdaptiveCoverageOracle


class TestInstanceSpec:
    def test_regeneration_is_bit_identical(self):
        for name, params in [("swapping-hard", {"i": 3, "delta": 0.01}),
                             ("greedy-instability",
                              {"i": 4, "delta": 0.1, "k": 2}),
                             ("sieve-instability",
                              {"n": 12, "mode": "doubling", "k": 3})]:
            first = generate(name, params)
            second = generate(name, params)
            assert first.to_json() == second.to_json()
            assert first.digest() == second.digest()
            assert len(first.digest()) == 64

    def test_json_round_trip_preserves_instance(self):
        spec = generate("swapping-hard", {"i": 2, "delta": 0.25})
        clone = InstanceSpec.from_json(spec.to_json())
        assert clone.to_json() == spec.to_json()
        oracle_a, stream_a = spec.materialize()
        oracle_b, stream_b = clone.materialize()
        assert stream_a == stream_b
        assert oracle_a.value(stream_a[:5]) == oracle_b.value(stream_b[:5])

    def test_from_json_requires_core_fields(self):
        with pytest.raises(ValueError, match="params"):
            InstanceSpec.from_json('{"name": "x", "oracle": {}}')

    def test_unknown_oracle_kind_rejected(self):
        spec = InstanceSpec(name="x", params={}, oracle_spec={"kind": "blob"})
        with pytest.raises(ValueError, match="blob"):
            spec.build_oracle()

    def test_default_stream_is_arrival_by_id(self):
        spec = generate("sieve-instability",
                        {"n": 4, "mode": "doubling", "k": 2})
        _, stream = spec.materialize()
        assert stream == [0, 1, 2, 3]

    def test_pinned_k(self):
        spec = generate("swapping-hard", {"i": 3, "delta": 0.01})
        assert spec.pinned_k == 8
        spec = InstanceSpec(name="x", params={}, oracle_spec={})
        assert spec.pinned_k is None


class TestGenerateDispatch:
    def test_unknown_generator_lists_known(self):
        with pytest.raises(ValueError, match="swapping-hard"):
            generate("national-parks", {})

    def test_missing_parameters_named(self):
        with pytest.raises(ValueError, match="delta"):
            generate("swapping-hard", {"i": 3})

    def test_agreeing_derived_parameter_tolerated(self):
        spec = generate("swapping-hard", {"i": 3, "delta": 0.01, "k": 8})
        assert spec.params["k"] == 8

    def test_disagreeing_extra_parameter_rejected(self):
        with pytest.raises(ValueError, match="k=9"):
            generate("swapping-hard", {"i": 3, "delta": 0.01, "k": 9})

    def test_registry_covers_all_names(self):
        assert set(GENERATORS) == {"swapping-hard", "greedy-instability",
                                   "sieve-instability"}


class TestSwappingHard:
    def test_stream_length_and_k(self):
        # (i+1) blocks of k singletons plus i whole-bundle elements
        for i in range(1, 8):
            spec = gen_swapping_hard(i, 0.01)
            k = 2 ** i
            assert spec.params["k"] == k
            _, stream = spec.materialize()
            assert len(stream) == (i + 1) * k + i

    def test_id_helpers_tile_the_stream(self):
        i = 3
        k = 2 ** i
        ids = []
        for j in range(i + 1):
            ids.extend(swapping_hard_singleton_ids(i, j))
            if j < i:
                ids.append(swapping_hard_bundle_id(i, j))
        assert ids == list(range((i + 1) * k + i))
        with pytest.raises(ValueError):
            swapping_hard_bundle_id(i, i)
        with pytest.raises(ValueError):
            swapping_hard_singleton_ids(i, i + 1)

    def test_element_values(self):
        i, delta = 3, 0.25
        oracle, _ = gen_swapping_hard(i, delta).materialize()
        k = 2 ** i
        for j in range(i):
            singleton = swapping_hard_singleton_ids(i, j)[0]
            assert oracle.value([singleton]) == float(2 ** j)
            bundle = swapping_hard_bundle_id(i, j)
            assert oracle.value([bundle]) == float(k * 2 ** j)
        last = swapping_hard_singleton_ids(i, i)[0]
        assert oracle.value([last]) == 2.0 ** i - delta

    @pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
    def test_swapping_stalls_on_the_previous_block(self, i):
        spec = gen_swapping_hard(i, 0.01)
        oracle, stream = spec.materialize()
        k = spec.params["k"]
        algo = Swapping(oracle, k=k).fit(stream)
        assert algo.trace_.final_value() == k * 2.0 ** (i - 1)
        assert sorted(algo.solution_.ids()) == \
            swapping_hard_singleton_ids(i, i - 1)

    @pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
    def test_strong_solution_value_matches_closed_form(self, i):
        delta = 0.01
        spec = gen_swapping_hard(i, delta)
        oracle, _ = spec.materialize()
        k = spec.params["k"]
        strong = swapping_hard_strong_solution(i)
        assert len(strong) == k
        expected = k * (2 ** i - 1) + (k - i) * (2 ** i - delta)
        assert oracle.value(strong) == pytest.approx(expected, rel=1e-12)

    def test_smallest_instance_exact_optimum(self):
        spec = gen_swapping_hard(1, 0.5)
        oracle, stream = spec.materialize()
        assert stream == [0, 1, 2, 3, 4]
        solution, opt = brute_force_opt(oracle, stream, spec.params["k"])
        assert sorted(solution.ids()) == [2, 3]
        assert opt == 3.5
        algo = Swapping(oracle, k=2).fit(stream)
        assert algo.trace_.final_value() == 2.0
        assert opt / algo.trace_.final_value() == 1.75

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            gen_swapping_hard(0, 0.1)
        with pytest.raises(ValueError):
            gen_swapping_hard(2, 0.0)
        with pytest.raises(ValueError):
            gen_swapping_hard(2, 1.0)


class TestGreedyInstability:
    def test_layout_maps_alternating_stream(self):
        cols, rows = greedy_instability_layout(3)
        assert cols == {1: 0, 2: 2, 3: 4}
        assert rows == {1: 1, 2: 3, 3: 5}

    def test_stream_is_column_row_alternation(self):
        spec = gen_greedy_instability(4, 0.1, 2)
        oracle, stream = spec.materialize()
        assert len(stream) == 8
        assert oracle.ground_size == 8

    def test_prefix_optima_churn_completely(self):
        spec = gen_greedy_instability(3, 0.1, 2)
        oracle, stream = spec.materialize()
        cols, rows = greedy_instability_layout(3)
        expected = {
            4: ({rows[1], rows[2]}, 6.8),
            5: ({cols[2], cols[3]}, 7.0),
            6: ({rows[2], rows[3]}, 7.2),
        }
        previous = None
        for t, (ids, value) in sorted(expected.items()):
            solution, opt = brute_force_opt(oracle, stream[:t], 2)
            assert set(solution) == ids
            assert opt == pytest.approx(value, abs=1e-12)
            if previous is not None:
                assert previous.isdisjoint(ids)
            previous = ids

    def test_greedy_tracks_the_churn(self):
        # after each full column/row pair, plain greedy lands on the last
        # k rows, so its solution also churns between consecutive prefixes
        spec = gen_greedy_instability(4, 0.1, 2)
        oracle, stream = spec.materialize()
        cols, rows = greedy_instability_layout(4)
        full = offline_greedy(oracle, stream, 2)
        assert set(full) == {rows[3], rows[4]}

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="k must lie in 1..3"):
            gen_greedy_instability(3, 0.1, 4)
        with pytest.raises(ValueError):
            gen_greedy_instability(1, 0.1, 1)
        with pytest.raises(ValueError):
            gen_greedy_instability(3, 1.5, 2)


class TestSieveInstability:
    def test_doubling_weights(self):
        spec = gen_sieve_instability(5, "doubling", 2)
        assert spec.oracle_spec["weights"] == [2.0, 4.0, 8.0, 16.0, 32.0]

    def test_blockwise_weights(self):
        spec = gen_sieve_instability(9, "blockwise", 3)
        assert spec.oracle_spec["weights"] == \
            [3.0] * 3 + [9.0] * 3 + [27.0] * 3

    def test_single_element_instance(self):
        oracle, stream = gen_sieve_instability(1, "doubling", 2).materialize()
        algo = SieveStreaming(oracle, k=2).fit(stream)
        assert algo.solution_.ids() == [0]

    def test_doubling_forces_an_addition_every_step(self):
        oracle, stream = gen_sieve_instability(20, "doubling",
                                               10).materialize()
        algo = SieveStreaming(oracle, k=10, eps=0.1).fit(stream)
        for rec in algo.trace_.steps:
            assert rec.additions == 1
            assert rec.t - 1 in rec.solution
        assert algo.trace_.cumulative_additions() == 20

    def test_blockwise_changes_wholesale(self):
        oracle, stream = gen_sieve_instability(9, "blockwise", 3).materialize()
        algo = SieveStreaming(oracle, k=3, eps=0.1).fit(stream)
        steps = {rec.t: rec for rec in algo.trace_.steps}
        # a value tie resolves toward the smaller threshold, so the stale
        # block survives the first arrival of the next block unchanged
        assert steps[4].solution == (0, 1, 2)
        assert steps[4].additions == 0
        # then the new block displaces it in one shot
        assert steps[5].solution == (3, 4)
        assert steps[5].additions == 2
        assert steps[5].removals == 3
        assert steps[9].solution == (6, 7, 8)

    def test_consistent_baseline_stays_incremental_on_the_same_stream(self):
        oracle, stream = gen_sieve_instability(20, "doubling",
                                               10).materialize()
        algo = EncompassingSet(oracle, k=10).fit(stream)
        assert all(rec.additions <= 1 for rec in algo.trace_.steps)

    def test_overflow_guards(self):
        with pytest.raises(ValueError, match="overflow"):
            gen_sieve_instability(901, "doubling", 2)
        with pytest.raises(ValueError, match="overflow"):
            gen_sieve_instability(10 ** 6, "blockwise", 2)

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="mode"):
            gen_sieve_instability(5, "tripling", 2)
        with pytest.raises(ValueError):
            gen_sieve_instability(0, "doubling", 2)
        with pytest.raises(ValueError):
            gen_sieve_instability(5, "doubling", 0)


class RogueOverfiller(StreamingMaximizer):
    """Deliberately ignores the cardinality constraint."""

    name = "rogue-overfiller"

    def _setup(self):
        self._ev = self.oracle.evaluator(self.counter_)

    def _step(self, e):
        self._ev.gain(e)
        self._ev.add(e)
        self.solution_.add(e)

    def _reported_value(self):
        return self._ev.value


class TestAdaptiveAdversary:
    def test_consistent_algorithms_hit_the_bound(self):
        for name in ("encompassing-set", "swapping"):
            trace, ratio = adaptive_lower_bound_adversary(name, 30)
            assert len(trace.steps) == 61
            assert trace.steps[-1].value == 30.0
            assert ratio == 59.0 / 30.0
            assert ratio >= 59.0 / 31.0

    def test_small_k_ratio(self):
        trace, ratio = adaptive_lower_bound_adversary("encompassing-set", 6)
        assert ratio == 11.0 / 6.0
        assert ratio >= 11.0 / 7.0

    def test_estimator_instance_accepted(self):
        algo = EncompassingSet(oracle=None, k=1)
        trace, ratio = adaptive_lower_bound_adversary(algo, 4)
        assert algo.k == 4
        assert len(trace.steps) == 9

    def test_chasing_local_opt_survives(self):
        trace, ratio = adaptive_lower_bound_adversary("chasing-local-opt", 5)
        assert len(trace.steps) == 11
        # its entry threshold stops short of a full solution here, but the
        # gap stays within the (1+eps) * phi^2 approximation factor
        assert 1.0 <= ratio <= 1.1 * (GOLDEN_RATIO ** 2)

    def test_sieve_survives(self):
        _, ratio = adaptive_lower_bound_adversary("sieve-streaming", 4)
        assert math.isfinite(ratio)
        assert ratio >= 1.0

    def test_overfilling_algorithm_is_flagged(self):
        with pytest.raises(ContractViolationError, match="rogue-overfiller"):
            adaptive_lower_bound_adversary(RogueOverfiller(None, k=2), 2)

    def test_invalid_k_rejected(self):
        with pytest.raises(ValueError):
            adaptive_lower_bound_adversary("swapping", 0)

    def test_adaptive_oracle_definition_rules(self):
        oracle = _AdaptiveCoverageOracle(2)
        assert oracle.ground_size == 5
        with pytest.raises(ValueError, match="not defined"):
            oracle.value([4])
        oracle.define(4, [0, 1])
        assert oracle.value([4]) == 2.0
        with pytest.raises(ValueError, match="already defined"):
            oracle.define(4, [0])
