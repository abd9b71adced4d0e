"""Capacity preserving mapping (CPM) for visualizing high-dimensional data."""

from .baseline import classical_mds
from .cad import CadTransform, adjusted_distance_matrix, build_transform, cad, monotone_envelope
from .dataset import (Dataset, generate_augmented_swiss_roll, generate_ball_shell,
                      generate_gaussian_cloud, generate_gaussian_clusters, load_csv, make_rng,
                      save_csv)
from .dimest import (CapacityCurve, DensityCurve, DimensionCurve, dimension_curve,
                     empirical_capacity, empirical_density, fit_c_and_n0,
                     initial_dimension_guess, n_m_at, normalize_distances,
                     refine_dimension_at_scale)
from .embed import (AffinityMatrix, Embedding, high_affinities, kl_divergence, kl_gradient,
                    low_affinities, optimize_embedding)
from .evaluation import (cluster_variances, crowding_overlap_score, inter_cluster_distances,
                         proximity_error_curve, proximity_matrix, shepard_pairs,
                         spearman_rank_correlation)
from .exceptions import (CPMError, ContractError, DegenerateDataError, InsufficientDataError,
                         InvalidGeometryError, InvalidParameterError, OptimizationDivergedError,
                         ParseError, UndefinedCorrelationError)
from .metricspace import (BridgedGraphWarning, DistanceMatrix, KnnGraph, MetricKind,
                          euclidean_distance_matrix, geodesic_distance_matrix, knn_graph)
from .pipeline import CPMResult, RunConfig, compute_distances, run_cpm, run_mds

__version__ = "0.1.0"
