"""Deterministic per-cluster channel structure.

For a cluster ``m`` this builds the large-scale gain matrix ``L``, the
diagonal interference-plus-noise powers ``xi`` and the whitened profile
``Q = sqrt(P / xi) * L`` whose Hadamard product with CN(0, 1) fading gives the
effective uplink channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rmtcap.clustering import ClusterAssignment
from rmtcap.errors import ParameterError
from rmtcap.scenario import NodeSet, distance_matrix


@dataclass(frozen=True)
class FadingParams:
    d0: float = 10.0  # near-field threshold, m
    d1: float = 50.0  # far-field threshold, m
    P: float = 1.0  # per-user transmit power, W
    N0: float = 1e-12  # noise power, W
    far_exponent: float = 1.75
    mid_exponent: float = 1.0

    def __post_init__(self):
        if not 0 < self.d0 < self.d1:
            raise ParameterError(f"need 0 < d0 < d1, got d0={self.d0}, d1={self.d1}")
        if not (self.P > 0 and self.N0 > 0):
            raise ParameterError("P and N0 must be positive")

    @property
    def knee_exponent(self) -> float:
        # keeps the gain continuous at d1
        return self.far_exponent - self.mid_exponent

    @property
    def plateau(self) -> float:
        return self.d1 ** -self.knee_exponent * self.d0 ** -self.mid_exponent


@dataclass
class ChannelProfile:
    L: np.ndarray  # (J_m, K_m) path gains
    xi: np.ndarray  # (J_m,) noise + interference power, W
    Q: np.ndarray  # (J_m, K_m) whitened gains

    @property
    def J_m(self) -> int:
        return self.Q.shape[0]

    @property
    def K_m(self) -> int:
        return self.Q.shape[1]

    @property
    def beta(self) -> float:
        return self.K_m / self.J_m


def large_scale_fading(d, params: FadingParams = FadingParams()):
    """Three-branch path gain: plateau below d0, d^-1 up to d1, steeper beyond."""
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore"):
        far = d ** -params.far_exponent
        mid = params.d1 ** -params.knee_exponent * d ** -params.mid_exponent
    g = np.where(d > params.d1, far, np.where(d > params.d0, mid, params.plateau))
    return g if g.ndim else float(g)


def fading_matrix(distances, params: FadingParams = FadingParams()) -> np.ndarray:
    """Large-scale gain matrix for a (BS rows) x (user cols) distance block."""
    return np.asarray(large_scale_fading(np.asarray(distances, dtype=float), params))


def interference_diagonal(distances, in_cluster, params: FadingParams = FadingParams()) -> np.ndarray:
    """Per-BS noise plus out-of-cluster interference power.

    ``distances`` holds every user (columns) against the cluster's BSs (rows);
    ``in_cluster`` marks the columns belonging to the cluster. Row sums use
    ``math.fsum`` so the result does not depend on user order.
    """
    distances = np.atleast_2d(np.asarray(distances, dtype=float))
    ext = ~np.asarray(in_cluster, dtype=bool)
    if ext.shape != (distances.shape[1],):
        raise ParameterError("membership mask does not match distance columns")
    g2 = fading_matrix(distances[:, ext], params) ** 2
    xi = np.array([math.fsum(row) for row in g2.tolist()]) if g2.shape[1] else np.zeros(len(g2))
    return params.N0 + params.P * xi


def profile_matrix(L, xi, params: FadingParams = FadingParams()) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi > 0)):
        raise AssertionError("interference powers must be positive")
    return np.sqrt(params.P / xi)[:, None] * np.asarray(L, dtype=float)


def gain_realization(Q, G) -> np.ndarray:
    Q = np.asarray(Q)
    G = np.asarray(G)
    if Q.shape != G.shape:
        raise ParameterError(f"shape mismatch {Q.shape} vs {G.shape}")
    return Q * G


def build_profile(nodes: NodeSet, assignment: ClusterAssignment, m: int,
                  params: FadingParams = FadingParams()) -> ChannelProfile:
    """Channel profile of cluster ``m`` in a clustered layout."""
    bs = nodes.bs_positions[assignment.labels_bs == m]
    members = assignment.labels_user == m
    return profile_from_positions(bs, nodes.user_positions, members, params)


def profile_from_positions(bs, users, members, params: FadingParams = FadingParams()) -> ChannelProfile:
    if len(bs) == 0:
        raise ParameterError("cluster has no BSs")
    d = distance_matrix(bs, users)
    members = np.asarray(members, dtype=bool)
    L = fading_matrix(d[:, members], params)
    xi = interference_diagonal(d, members, params)
    return ChannelProfile(L, xi, profile_matrix(L, xi, params))
