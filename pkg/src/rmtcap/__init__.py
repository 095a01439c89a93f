"""Fast capacity estimation for clustered ultra-dense uplinks.

The Moment Passing Method fits a polynomially corrected Marchenko-Pastur
density to closed-form spectral moments and integrates ``log(1 + x)``
against it; an exact Cholesky log-det estimator serves as the reference.
"""

from rmtcap.baseline import estimate_capacity_cdm, relative_error
from rmtcap.channel import ChannelProfile, FadingParams, build_profile
from rmtcap.clustering import central_cluster, cluster_network, kmeans
from rmtcap.mpm import CapacityEstimate, LsdModel, estimate_capacity_mpm, moments, theta_matrix
from rmtcap.scenario import NodeSet, Region, distance_matrix, sample_nodes

__all__ = [
    "CapacityEstimate",
    "ChannelProfile",
    "FadingParams",
    "LsdModel",
    "NodeSet",
    "Region",
    "build_profile",
    "central_cluster",
    "cluster_network",
    "distance_matrix",
    "estimate_capacity_cdm",
    "estimate_capacity_mpm",
    "kmeans",
    "moments",
    "relative_error",
    "sample_nodes",
    "theta_matrix",
]
__version__ = "0.1.0"
