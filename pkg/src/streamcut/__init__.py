"""Streaming estimation of metric Max-Cut values under a distance-oracle model."""

from .coreset import ExactPrefixCoreset, MergeReduceCoreset
from .cut import (
    CutResult,
    WeightedPointSet,
    cut_value,
    exact_maxcut_matrix,
    local_search_matrix,
    maxcut_exact,
    maxcut_local_search,
)
from .errors import (
    ConfigError,
    EmptyStream,
    InstanceTooLarge,
    QueryOnUnseenId,
    StreamFormatError,
)
from .estimator import Estimate, EstimatorConfig, InsertionEstimator, estimate_stream
from .metric import (
    DistanceOracle,
    EuclideanOracle,
    MatrixOracle,
    MetricConfig,
    load_metric,
    verify_metric,
)
from .sampler import ReservoirSampler, default_K, inclusion_probabilities
from .window import SlidingWindowEstimator, f_value

__version__ = "0.1.0"
