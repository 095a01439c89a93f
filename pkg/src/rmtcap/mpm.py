"""Moment Passing Method.

The spectrum of ``A = (Q o G)(Q o G)^H`` is modelled as a Marchenko-Pastur
shaped density on ``[a, b]`` times a degree-``N`` polynomial. The polynomial
coefficients are chosen so the model reproduces the first ``N`` spectral
moments, which are available in closed form from ``Q`` alone; capacity is then
a one-dimensional weighted integral of ``log(1 + x)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from rmtcap.channel import ChannelProfile
from rmtcap.errors import FitError, ParameterError, SingularSystemError
from rmtcap.numkernel import (
    chebyshev_nodes,
    chebyshev_weighted_integral,
    power_method_max_eig,
    sample_complex_gaussian,
    solve_dense,
    trial_stream,
)
from rmtcap.parallel import map_trials

MAX_ORDER = 3
DEFAULT_ETA = 4e-3
DEFAULT_ORDER = 3
DEFAULT_TRIALS = 20
DEFAULT_POWER_ITERS = 15
DEFAULT_NODES = 256
MAX_CONDITION = 1e12


@dataclass
class MomentVector:
    values: np.ndarray  # phi_0 .. phi_N

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, j):
        return self.values[j]


@dataclass
class LsdModel:
    a: float
    b: float
    beta: float
    K_m: int
    alpha: np.ndarray  # polynomial coefficients, increasing degree
    fit_residual: float = 0.0
    condition: float = float("nan")

    @property
    def N(self) -> int:
        return len(self.alpha) - 1

    @property
    def delta_mass(self) -> float:
        return 1.0 - self.beta if self.beta < 1 else 0.0

    @property
    def weight_scale(self) -> float:
        return self.beta / (2.0 * math.pi * self.K_m)


@dataclass
class CapacityEstimate:
    method: str
    values: np.ndarray  # per-trial capacity per BS, natural log
    wall_time: float
    seed: int
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.values)

    @property
    def value(self) -> float:
        return float(np.mean(self.values))

    mean = value

    @property
    def stderr(self) -> float:
        if self.trials < 2:
            return 0.0
        return float(np.std(self.values, ddof=1) / math.sqrt(self.trials))


def theta_matrix(Q, n: int | None = None) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if n is None:
        n = Q.shape[1]
    return n * Q * Q


def moments(theta, N: int = MAX_ORDER) -> MomentVector:
    """Spectral moments phi_0..phi_N of the Gram matrix with variance profile theta/n.

    ``theta`` is p x n. With row sums R, column sums C and
    ``T = theta @ C``:

        phi_1 = sum(R) / (p n)
        phi_2 = sum(R^2 + T) / (p n^2)
        phi_3 = sum(R^3 + 2 R T + theta @ (C^2 + theta^T R)) / (p n^3)
    """
    if N > MAX_ORDER:
        raise ParameterError(f"moments beyond order {MAX_ORDER} are not available")
    if N < 0:
        raise ParameterError("N must be >= 0")
    theta = np.asarray(theta, dtype=float)
    p, n = theta.shape
    R = theta.sum(axis=1)
    C = theta.sum(axis=0)
    phi = [1.0]
    if N >= 1:
        phi.append(R.sum() / (p * n))
    if N >= 2:
        T = theta @ C
        phi.append(np.sum(R * R + T) / (p * n**2))
    if N >= 3:
        U = theta @ (C * C + theta.T @ R)
        phi.append(np.sum(R**3 + 2.0 * R * T + U) / (p * n**3))
    return MomentVector(np.array(phi))


def _unit_table(eta: float, beta: float, K_m: int, max_index: int, nodes: int) -> np.ndarray:
    """Coefficient table on the rescaled support [eta, 1]."""
    w = beta / (2.0 * math.pi * K_m)
    c = np.empty(max_index + 1)
    # closed form: the 1/x term converges only algebraically under the quadrature as eta -> 0
    c[0] = w * math.pi * (0.5 * (1.0 + eta) - math.sqrt(eta))
    for i in range(1, max_index + 1):
        c[i] = chebyshev_weighted_integral(lambda s, i=i: w * s ** (i - 1), eta, 1.0, nodes)
    return c


def mp_coefficient_table(a: float, b: float, beta: float, K_m: int, max_index: int,
                         nodes: int = DEFAULT_NODES) -> np.ndarray:
    """c_i = integral of x^i times the MP-shaped weight over [a, b], i = 0..max_index."""
    if not 0 <= a < b:
        raise ParameterError(f"need 0 <= a < b, got a={a}, b={b}")
    if K_m < 1:
        raise ParameterError("K_m must be >= 1")
    c = _unit_table(a / b, beta, K_m, max_index, nodes)
    return c * b ** np.arange(1, max_index + 2, dtype=float)


def fit_alpha(c, phi, beta: float, N: int, scale: float | None = None):
    """Solve sum_k c[j+k] alpha_k = phi_j, j = 0..N.

    For beta < 1 the j = 0 right-hand side is beta: the point mass at zero
    carries the remaining 1 - beta. The system is solved after rescaling
    ``x -> x / scale`` to keep it well conditioned; ``scale`` defaults to
    c[1]/c[0] (1 for a one-entry table). Returns ``(alpha, residual, condition)``.
    """
    c = np.asarray(c, dtype=float)
    phi = np.asarray(phi, dtype=float)[: N + 1]
    if len(c) < 2 * N + 1 or len(phi) < N + 1:
        raise ParameterError("coefficient table or moment vector too short")
    if scale is None:
        scale = c[1] / c[0] if len(c) > 1 else 1.0
    powers = scale ** -np.arange(1, 2 * N + 2, dtype=float)
    c_hat = c[: 2 * N + 1] * powers
    H = np.array([[c_hat[j + k] for k in range(N + 1)] for j in range(N + 1)])
    rhs = phi.copy()
    if beta < 1:
        rhs[0] = phi[0] - (1.0 - beta)
    rhs = rhs * scale ** -np.arange(N + 1, dtype=float)
    cond = float(np.linalg.cond(H))
    if not cond < MAX_CONDITION:
        raise FitError(f"moment system condition number {cond:.3e}", condition=cond)
    try:
        alpha_hat, residual = solve_dense(H, rhs)
    except SingularSystemError as exc:
        raise FitError(str(exc), condition=cond) from exc
    alpha = alpha_hat * powers[: N + 1]
    return alpha, residual, cond


def fit_lsd(phi: MomentVector, b: float, eta: float, beta: float, K_m: int, N: int,
            nodes: int = DEFAULT_NODES) -> LsdModel:
    if not 0 <= eta < 1:
        raise ParameterError(f"eta must lie in [0, 1), got {eta}")
    a = eta * b
    c = mp_coefficient_table(a, b, beta, K_m, 2 * N, nodes)
    alpha, residual, cond = fit_alpha(c, phi.values, beta, N, scale=b)
    return LsdModel(a, b, beta, K_m, alpha, residual, cond)


def _poly(model: LsdModel, x):
    # Horner in x / b keeps intermediate magnitudes O(1)
    s = np.asarray(x, dtype=float) / model.b
    coef = model.alpha * model.b ** np.arange(len(model.alpha), dtype=float)
    return np.polynomial.polynomial.polyval(s, coef)


def lsd_density(model: LsdModel, x):
    """Continuous part of the fitted density; zero outside [a, b]."""
    x = np.asarray(x, dtype=float)
    inside = (x >= model.a) & (x <= model.b) & (x > 0)
    xs = np.where(inside, x, 0.5 * (model.a + model.b))
    root = np.sqrt(np.clip((model.b - xs) * (xs - model.a), 0.0, None))
    f = np.where(inside, model.weight_scale * root / xs * _poly(model, xs), 0.0)
    return f if f.ndim else float(f)


def continuous_mass(model: LsdModel, nodes: int = DEFAULT_NODES) -> float:
    """Integral of the continuous part, exact up to the 1/x term's closed form."""
    c = mp_coefficient_table(model.a, model.b, model.beta, model.K_m, model.N, nodes)
    return float(np.dot(c[: model.N + 1], model.alpha))


def negative_density_fraction(model: LsdModel, nodes: int = DEFAULT_NODES) -> float:
    t, _ = chebyshev_nodes(nodes)
    x = 0.5 * (model.a + model.b) + 0.5 * (model.b - model.a) * t
    return float(np.mean(_poly(model, x) < 0))


def capacity_integral(model: LsdModel, nodes: int = DEFAULT_NODES) -> float:
    """Integral of log(1 + x) against the continuous part (natural log).

    The point mass sits at zero where log(1 + x) vanishes.
    """
    if model.b <= 0 or not np.any(model.alpha):
        return 0.0

    def g(x):
        return np.log1p(x) / x * model.weight_scale * _poly(model, x)

    return chebyshev_weighted_integral(g, model.a, model.b, nodes)


def estimate_capacity_mpm(profile: ChannelProfile, eta: float = DEFAULT_ETA,
                          N: int = DEFAULT_ORDER, trials: int = DEFAULT_TRIALS,
                          seed: int = 0, power_iters: int = DEFAULT_POWER_ITERS,
                          nodes: int = DEFAULT_NODES, workers: int = 1) -> CapacityEstimate:
    """Monte-Carlo MPM estimate of the per-BS capacity of one cluster.

    Moments come from the profile once; every trial draws its own fading
    realisation from ``trial_stream(seed, t)`` to locate the top edge ``b``
    by power iteration, then fits and integrates the model.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not 0 <= eta < 1:
        raise ParameterError(f"eta must lie in [0, 1), got {eta}")
    if N > MAX_ORDER:
        raise ParameterError(f"N must be <= {MAX_ORDER}")
    start = time.perf_counter()
    Q = profile.Q
    J_m, K_m = Q.shape
    if J_m == 0:
        raise ParameterError("profile has no BSs")
    if K_m == 0:
        return CapacityEstimate("mpm", np.zeros(trials), time.perf_counter() - start, seed,
                                [{"neg_density_frac": 0.0, "fit_residual": 0.0, "wall_time": 0.0}
                                 for _ in range(trials)])
    phi = moments(theta_matrix(Q), N)
    beta = K_m / J_m

    def one(t):
        t0 = time.perf_counter()
        rng = trial_stream(seed, t)
        B = Q * sample_complex_gaussian(rng, J_m, K_m)
        b = power_method_max_eig(B, power_iters, rng)
        if b <= 0:
            return 0.0, {"neg_density_frac": 0.0, "fit_residual": 0.0, "b": 0.0,
                         "wall_time": time.perf_counter() - t0}
        try:
            model = fit_lsd(phi, b, eta, beta, K_m, N, nodes)
        except FitError as exc:
            exc.trial = t
            exc.args = (f"trial {t}: {exc.args[0]}",)
            raise
        value = capacity_integral(model, nodes)
        diag = {"neg_density_frac": negative_density_fraction(model, nodes),
                "fit_residual": model.fit_residual, "b": b,
                "wall_time": time.perf_counter() - t0}
        return value, diag

    out = map_trials(one, trials, workers)
    values = np.array([v for v, _ in out])
    return CapacityEstimate("mpm", values, time.perf_counter() - start, seed, [d for _, d in out])
