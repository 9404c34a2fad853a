"""Multi-label feature selection toolkit.

Feature selection couples a least-squares multi-label loss with a
manifold penalty over a random-walk-sampled neighborhood graph and a
blended row-sparse/Frobenius regularizer; selected subsets are scored
with an ML-KNN classifier and standard ranking metrics.
"""

from .data import Dataset, DatasetStats, SplitSpec, LoadError, load_csv, load_arff, split, \
    add_gaussian_noise, stats
from .graph import WalkConfig, JointSimilarity, NeighborhoodGraph, WalkDiagnostics, \
    pairwise_distances, gaussian_weights, jaccard_matrix, joint_similarity, \
    transition_matrix, random_walk_counts, neighborhood_graph, build_graph
from .solver import SolverParams, SolverState, FeatureRanking, SolverError, objective, \
    update_bias, update_coef, update_reweight, fit, rank_features, select_top
from .mlknn import MlKnn, RankingPrediction
from .metrics import MetricReport, RankTable, hamming_loss, ranking_loss, one_error, \
    coverage, average_precision, compute_report, friedman_ranks, critical_difference

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DatasetStats", "SplitSpec", "LoadError",
    "load_csv", "load_arff", "split", "add_gaussian_noise", "stats",
    "WalkConfig", "JointSimilarity", "NeighborhoodGraph", "WalkDiagnostics",
    "pairwise_distances", "gaussian_weights", "jaccard_matrix", "joint_similarity",
    "transition_matrix", "random_walk_counts", "neighborhood_graph", "build_graph",
    "SolverParams", "SolverState", "FeatureRanking", "SolverError",
    "objective", "update_bias", "update_coef", "update_reweight",
    "fit", "rank_features", "select_top",
    "MlKnn", "RankingPrediction",
    "MetricReport", "RankTable", "hamming_loss", "ranking_loss", "one_error",
    "coverage", "average_precision", "compute_report",
    "friedman_ranks", "critical_difference",
]
