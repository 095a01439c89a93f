"""Reproducible planar network layouts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rmtcap.errors import ParameterError
from rmtcap.numkernel import STREAM_SCENARIO, rng_stream

SHAPES = ("square", "circle")
DISTRIBUTIONS = ("uniform", "truncated_normal")


@dataclass(frozen=True)
class Region:
    shape: str = "circle"
    D: float = 2000.0  # side length (square) or diameter (circle), meters
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"unknown region shape {self.shape!r}")
        if not self.D > 0:
            raise ParameterError(f"region scale D must be positive, got {self.D}")

    @property
    def half(self) -> float:
        return 0.5 * self.D


@dataclass
class NodeSet:
    bs_positions: np.ndarray  # (J, 2)
    user_positions: np.ndarray  # (K, 2)
    region: Region
    distribution: str
    seed: int
    sigma: float | None = None
    tag: str = field(default="")

    @property
    def J(self) -> int:
        return len(self.bs_positions)

    @property
    def K(self) -> int:
        return len(self.user_positions)


def in_region(p, region: Region):
    """Closed-set membership test; accepts one point or an (n, 2) array."""
    p = np.asarray(p, dtype=float)
    rel = p - np.asarray(region.center, dtype=float)
    if region.shape == "square":
        inside = np.max(np.abs(rel), axis=-1) <= region.half
    else:
        inside = np.hypot(rel[..., 0], rel[..., 1]) <= region.half
    return bool(inside) if inside.ndim == 0 else inside


def _draw(rng, region: Region, n: int, distribution: str, sigma: float) -> np.ndarray:
    center = np.asarray(region.center, dtype=float)
    out = np.empty((0, 2))
    while len(out) < n:
        need = n - len(out)
        # oversample so a single pass usually suffices
        batch = max(16, int(need * 1.5) + 8)
        if distribution == "uniform":
            pts = center + rng.uniform(-region.half, region.half, size=(batch, 2))
        else:
            pts = center + sigma * rng.standard_normal((batch, 2))
        pts = pts[in_region(pts, region)]
        out = np.vstack([out, pts[:need]])
    return out


def sample_nodes(region: Region, J: int, K: int, distribution: str = "uniform",
                 seed: int = 0, sigma: float | None = None) -> NodeSet:
    """Place ``J`` BSs and ``K`` users inside ``region``.

    Uniform layouts are drawn by rejection from the bounding square. The
    truncated-normal layout is an isotropic normal around the region centre
    (per-axis std ``sigma``, default ``D/4``) with out-of-region draws
    rejected. BSs and users share the distribution parameters.
    """
    if J < 1 or K < 0:
        raise ParameterError(f"need J >= 1 and K >= 0, got J={J}, K={K}")
    if distribution not in DISTRIBUTIONS:
        raise ParameterError(f"unknown distribution {distribution!r}")
    if sigma is None:
        sigma = region.D / 4.0
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    rng = rng_stream(seed, STREAM_SCENARIO)
    bs = _draw(rng, region, J, distribution, sigma)
    users = _draw(rng, region, K, distribution, sigma) if K else np.empty((0, 2))
    return NodeSet(bs, users, region, distribution, int(seed), sigma)


def distance_matrix(bs, users) -> np.ndarray:
    """Euclidean distances, entry (j, k) between BS j and user k."""
    bs = np.asarray(bs, dtype=float).reshape(-1, 2)
    users = np.asarray(users, dtype=float).reshape(-1, 2)
    if len(bs) == 0:
        raise ParameterError("at least one BS required")
    diff = bs[:, None, :] - users[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])
