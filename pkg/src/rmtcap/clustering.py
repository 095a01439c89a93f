"""Lloyd K-means partition of the pooled BS + user layout."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from rmtcap.errors import ParameterError
from rmtcap.numkernel import STREAM_KMEANS, rng_stream
from rmtcap.scenario import NodeSet, Region

log = logging.getLogger(__name__)


@dataclass
class KMeansResult:
    centroids: np.ndarray  # (M, 2)
    labels: np.ndarray  # (n,)
    n_iter: int
    converged: bool
    inertia_history: list[float]

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]


@dataclass
class ClusterAssignment:
    labels_bs: np.ndarray
    labels_user: np.ndarray
    centroids: np.ndarray
    M: int
    converged: bool = True

    @property
    def bs_counts(self) -> np.ndarray:
        return np.bincount(self.labels_bs, minlength=self.M)

    @property
    def user_counts(self) -> np.ndarray:
        return np.bincount(self.labels_user, minlength=self.M)

    @property
    def bs_free_clusters(self) -> list[int]:
        """Clusters with no BS; their capacity is undefined."""
        return [int(m) for m in np.flatnonzero(self.bs_counts == 0)]


def _sq_dists(points, centroids):
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nmk,nmk->nm", diff, diff)


def _kmeanspp(points, M, rng):
    n = len(points)
    centroids = np.empty((M, 2))
    centroids[0] = points[rng.integers(n)]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for m in range(1, M):
        total = d2.sum()
        if total == 0.0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.uniform(0.0, total), side="right"))
            idx = min(idx, n - 1)
        centroids[m] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centroids[m]) ** 2, axis=1))
    return centroids


def kmeans(points, M: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-9) -> KMeansResult:
    """Lloyd iterations from k-means++ seeding.

    Points are put in lexicographic order before seeding so the partition does
    not depend on input order. A cluster that empties is re-seeded at the point
    farthest from its current centroid.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if M < 1:
        raise ParameterError("M must be >= 1")
    if M > n:
        raise ParameterError(f"M={M} exceeds number of points {n}")

    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    rng = rng_stream(seed, STREAM_KMEANS)
    centroids = _kmeanspp(pts, M, rng)

    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(pts, centroids)
        labels = np.argmin(d2, axis=1)
        counts = np.bincount(labels, minlength=M)
        for m in np.flatnonzero(counts == 0):
            far = int(np.argmax(d2[np.arange(n), labels]))
            centroids[m] = pts[far]
            d2 = _sq_dists(pts, centroids)
            labels = np.argmin(d2, axis=1)
            counts = np.bincount(labels, minlength=M)
        inertia = float(d2[np.arange(n), labels].sum())
        if history and inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise AssertionError(f"Lloyd objective increased at iteration {it}")
        history.append(inertia)

        new = np.zeros_like(centroids)
        np.add.at(new, labels, pts)
        new /= np.maximum(counts, 1)[:, None]
        shift = float(np.max(np.hypot(*(new - centroids).T)))
        centroids = new
        if shift < tol:
            converged = True
            break

    d2 = _sq_dists(pts, centroids)
    labels = np.argmin(d2, axis=1)
    history.append(float(d2[np.arange(n), labels].sum()))
    if not converged:
        log.warning("k-means hit max_iter=%d before converging", max_iter)

    out = np.empty(n, dtype=np.intp)
    out[order] = labels
    return KMeansResult(centroids, out, it, converged, history)


def cluster_network(nodes: NodeSet, M: int, seed: int = 0, max_iter: int = 100,
                    tol: float | None = None) -> ClusterAssignment:
    if nodes.J + nodes.K < M:
        raise ParameterError(f"cannot form {M} clusters from {nodes.J + nodes.K} nodes")
    if tol is None:
        tol = 1e-6 * nodes.region.D
    pooled = np.vstack([nodes.bs_positions, nodes.user_positions])
    res = kmeans(pooled, M, seed=seed, max_iter=max_iter, tol=tol)
    asg = ClusterAssignment(res.labels[:nodes.J], res.labels[nodes.J:], res.centroids, M,
                            res.converged)
    if asg.bs_free_clusters:
        log.warning("clusters without BSs: %s", asg.bs_free_clusters)
    return asg


def central_cluster(assignment: ClusterAssignment, region: Region) -> int:
    """Cluster whose centroid is nearest the region centre (lowest index on ties)."""
    d = np.hypot(*(np.asarray(assignment.centroids) - np.asarray(region.center)).T)
    return int(np.argmin(d))
