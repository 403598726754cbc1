"""Consistent streaming submodular maximization under a cardinality constraint.

Streaming algorithms that bound how much the maintained solution may change
per arrival, the monotone submodular objectives they are benchmarked on,
adversarial instance generators, and a CLI harness that records per-step
value, consistency, and oracle-call traces.
"""

from .algorithms import (ALGORITHMS, GOLDEN_RATIO, STREAMING_ALGORITHMS,
                         BruteForceReplay, ChasingLocalOpt, EncompassingSet,
                         OfflineGreedyReplay, SieveStreaming,
                         StreamingMaximizer, Swapping, brute_force_opt,
                         is_local_optimum, make_algorithm, min_swap,
                         offline_greedy, swap_budget)
from .core import (CallCounter, ContractViolationError, ElementSet,
                   NumericError, ResourceLimitError, RunTrace, StepRecord,
                   ValueOracle, change_counts, check_oracle, marginal,
                   read_trace_csv, validate_trace, write_trace_csv,
                   write_trace_json)
from .generators import (GENERATORS, InstanceSpec,
                         adaptive_lower_bound_adversary, generate,
                         gen_greedy_instability, gen_sieve_instability,
                         gen_swapping_hard, greedy_instability_layout,
                         swapping_hard_bundle_id, swapping_hard_singleton_ids,
                         swapping_hard_strong_solution)
from .harness import (RunConfig, compare, comparison_csv, comparison_text,
                      resolve_instance, run)
from .ingest import (EdgeListGraph, FeatureMatrix, GeoPointSet,
                     load_edge_list, load_feature_matrix, load_points_csv,
                     subsample)
from .oracles import (DominatingOracle, KMedoidOracle, LogDetOracle,
                      ModularOracle, RecommendationOracle,
                      WeightedCoverageOracle, haversine_m)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "GENERATORS", "GOLDEN_RATIO", "STREAMING_ALGORITHMS",
    "BruteForceReplay", "CallCounter", "ChasingLocalOpt",
    "ContractViolationError", "DominatingOracle", "EdgeListGraph",
    "ElementSet", "EncompassingSet", "FeatureMatrix", "GeoPointSet",
    "InstanceSpec", "KMedoidOracle", "LogDetOracle", "ModularOracle",
    "NumericError", "OfflineGreedyReplay", "RecommendationOracle",
    "ResourceLimitError", "RunConfig", "RunTrace", "SieveStreaming",
    "StepRecord", "StreamingMaximizer", "Swapping", "ValueOracle",
    "WeightedCoverageOracle", "adaptive_lower_bound_adversary",
    "brute_force_opt", "change_counts", "check_oracle", "compare",
    "comparison_csv", "comparison_text", "generate",
    "gen_greedy_instability", "gen_sieve_instability", "gen_swapping_hard",
    "greedy_instability_layout", "haversine_m", "is_local_optimum",
    "load_edge_list", "load_feature_matrix", "load_points_csv",
    "make_algorithm", "marginal",
    "min_swap", "offline_greedy", "read_trace_csv", "resolve_instance",
    "run", "subsample", "swap_budget", "swapping_hard_bundle_id",
    "swapping_hard_singleton_ids", "swapping_hard_strong_solution",
    "validate_trace", "write_trace_csv", "write_trace_json",
]
