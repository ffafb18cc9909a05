"""Model selection by searching Learning Spaces of set-partition models."""
from .domain import (
    DomainError, EmpiricalMeasure, FiniteDomain, JointDistribution, Sample,
    empirical_measure, kfold_split, sample_from, split_holdout,
)
from .lattice import (
    LatticeError, LearningSpace, MaterializedSpace, Partition, PartitionLattice,
    all_partitions, bell_number, boolean_embedding, enumerate_nodes, feature_lattice,
    feature_set_to_partition, hasse_distance, join, l2_space, leq, meet, neighbors, vc_dim,
)
from .learner import Hypothesis, TieRule, best_in_model, empirical_loss, erm_on_partition, true_loss
from .estimators import EstimateCache, EstimatorSpec, FixedCosts, ModelEstimate, estimate, estimate_all
from .search import (
    ExclusionSet, SearchConfig, SearchReport, StochasticConfig, convexity_skip, exhaustive_search,
    exhaustive_search_costs, learn_final_hypothesis, minimum_exhausted, select_least_vc,
    ucurve_search, ucurve_search_costs,
)
from .analysis import (
    ErrorQuadruple, MinimumKind, SpaceStats, TargetSummary, check_lattice_convexity, check_ucurve,
    classify_minimum, consistency_experiment, estimation_errors, space_stats, target_model,
)

__version__ = "0.1.0"
