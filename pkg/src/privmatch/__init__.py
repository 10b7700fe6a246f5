"""Privacy-preserving batch task assignment.

Workers and tasks publish geo-indistinguishable (planar-Laplace perturbed)
locations; the server matches them with max-flow baselines, then small
groups of matched pairs re-check true reachability through a Paillier-based
secure protocol and swap tasks when that improves the assignment.
"""
from .geo import GeoIParams, ReachProbEstimator, perturb, perturb_instance
from .grouping import (KDivision, KGroup, division_score, exact_pair_division,
                       graph_transform, greedy_grouping, group_score, pair_score)
from .harness import ExperimentConfig, RunResult, gen_synthetic, ingest_latlon, run_experiment
from .matching import (build_reachability_graph, match_max_cardinality,
                       match_optimal, match_randomized_rounding, round_flows,
                       selection_probabilities)
from .model import (Location, MatchedPair, Matching, ProblemInstance, Task,
                    Worker, euclidean_distance, is_reachable_true, utility)
from .protocol import GroupResult, Transcript, audit_transcript, elect_proxies, run_group_exchange
from .switching import RoundReport, SwitchConfig, run_switch

__all__ = [name for name in dir() if not name.startswith("_")]
