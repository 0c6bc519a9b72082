"""No-dimensional Tverberg partitions and relatives.

Partition a point set into groups of size O(1/eps^2) -- independent of the
dimension -- whose convex hulls all meet a common ball around the
centroid, in linear (randomized) or near-linear (deterministic) time.
Every algorithm emits an independently checkable certificate.
"""

from .core import (
    Ball,
    DomainError,
    HullDistance,
    HullWitness,
    PointSet,
    PointSetStats,
    as_point_set,
    avg_price,
    centroid,
    diameter_exact,
    dist_to_hull,
    hull_collides,
)
from .tverberg import (
    PartitionRound,
    RandomPartitionTrace,
    TverbergCertificate,
    VerificationReport,
    partition_round,
    random_tverberg_core,
    tverberg_fast,
    tverberg_partition,
    verify_certificate,
)
from .halving import (
    CHAIN_CONSTANT,
    HalvingState,
    HalvingTreeTrace,
    derand_halving,
    halving_tree_partition,
    random_halving,
    random_halving_retry,
)
from .sampling import (
    ConditionalState,
    SampleResult,
    derand_sample_by_halving,
    derand_sample_fast,
    derand_sample_slow,
    sample_mean_with_replacement,
    sample_mean_without_replacement,
)
from .applications import (
    CaratheodoryResult,
    CenterballResult,
    WeakNet,
    audit_weak_net,
    caratheodory_approx,
    centerball,
    halfspace_depth_check_2d,
    selection_ball,
    weak_epsilon_net,
)

__version__ = "0.1.0"
