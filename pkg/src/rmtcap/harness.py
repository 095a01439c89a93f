"""Experiment runner: scenarios, paired method comparisons, sweeps and timing."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from rmtcap.baseline import estimate_capacity_cdm, relative_error
from rmtcap.channel import ChannelProfile, FadingParams, build_profile, profile_from_positions
from rmtcap.clustering import central_cluster, cluster_network
from rmtcap.errors import DegenerateScenarioError, ParameterError
from rmtcap.mpm import CapacityEstimate, estimate_capacity_mpm, moments, theta_matrix
from rmtcap.numkernel import rng_stream, sample_complex_gaussian
from rmtcap.parallel import worker_count
from rmtcap.scenario import DISTRIBUTIONS, SHAPES, Region, sample_nodes

METHODS = ("mpm", "cdm")
MODES = ("network", "direct")
STREAM_RING = 3


@dataclass
class ExperimentConfig:
    shape: str = "circle"
    dist: str = "uniform"
    D: float = 2000.0
    M: int = 25
    bs: int = 200  # BS count per cluster (target in network mode)
    users: int | None = None  # explicit user count, overrides beta
    beta: tuple[float, ...] = (2.0,)
    methods: tuple[str, ...] = METHODS
    trials: int = 20
    eta: float = 4e-3
    moments: int = 3
    seed: int = 1
    mode: str = "network"
    sizes: tuple[int, ...] = (100, 200, 400, 800)
    reps: int = 3
    timing_trials: int = 2
    etas: tuple[float, ...] = (0.0, 5e-4, 1e-3, 2e-3, 4e-3, 8e-3, 1e-2, 2e-2)
    orders: tuple[int, ...] = (1, 2, 3)
    log_base: str = "e"
    out: str | None = None
    format: str = "csv"
    threads: int | None = None
    sigma: float | None = None  # truncated-normal std, default D/4
    ring_users: int | None = None  # direct mode external interferers, default K_m
    d0: float = 10.0
    d1: float = 50.0
    P: float = 1.0
    N0: float = 1e-12
    power_iters: int = 15
    nodes: int = 256
    record_timing: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"shape must be one of {SHAPES}")
        if self.dist not in DISTRIBUTIONS:
            raise ParameterError(f"dist must be one of {DISTRIBUTIONS}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ParameterError(f"unknown methods {sorted(bad)}")
        if self.M < 1 or self.bs < 1 or self.trials < 1:
            raise ParameterError("M, bs and trials must be positive")
        if not self.D > 0:
            raise ParameterError("D must be positive")
        if not 0 <= self.eta < 1:
            raise ParameterError("eta must lie in [0, 1)")
        if not 0 <= self.moments <= 3:
            raise ParameterError("moments must be between 0 and 3")
        if any(b <= 0 for b in self.beta):
            raise ParameterError("beta values must be positive")
        self.log_base = str(self.log_base)
        if self.log_base not in ("e", "2"):
            raise ParameterError("log base must be 'e' or '2'")
        if self.format not in ("csv", "json"):
            raise ParameterError("format must be csv or json")

    @property
    def fading(self) -> FadingParams:
        return FadingParams(self.d0, self.d1, self.P, self.N0)

    @property
    def log_scale(self) -> float:
        return 1.0 if self.log_base == "e" else 1.0 / math.log(2.0)

    @property
    def workers(self) -> int:
        return worker_count(self.threads)


@dataclass
class Scenario:
    tag: str
    profile: ChannelProfile
    beta_target: float
    seed: int

    @property
    def J_m(self) -> int:
        return self.profile.J_m

    @property
    def K_m(self) -> int:
        return self.profile.K_m


@dataclass
class ReportRow:
    scenario: str
    J_m: int
    K_m: int
    beta: float
    method: str
    trial: int
    capacity: float
    wall_time_s: float | None
    seed: int
    neg_density_frac: float | None = None
    fit_residual: float | None = None


@dataclass
class ScenarioResult:
    scenario: Scenario
    estimates: dict[str, CapacityEstimate] = field(default_factory=dict)

    @property
    def error(self) -> float:
        return relative_error(self.estimates["mpm"], self.estimates["cdm"])


def _user_count(config: ExperimentConfig, beta: float, bs_total: int) -> int:
    if config.users is not None:
        return int(config.users)
    return int(round(beta * bs_total))


def build_scenario(config: ExperimentConfig, beta: float, mode: str | None = None) -> Scenario:
    """Build the channel profile of the measured cluster.

    ``network`` mode lays out ``M * bs`` BSs over the whole region, clusters
    it and keeps the cluster nearest the centre. ``direct`` mode places exactly
    ``bs`` BSs and ``K_m`` users in one cluster-sized disk with a ring of
    external interfering users around it.
    """
    mode = mode or config.mode
    region = Region(config.shape, config.D)
    tag = f"{config.shape}-{config.dist}-{mode}-b{beta:g}-J{config.bs}"
    if mode == "network":
        J = config.M * config.bs
        nodes = sample_nodes(region, J, _user_count(config, beta, J), config.dist,
                             config.seed, config.sigma)
        asg = cluster_network(nodes, config.M, seed=config.seed)
        m = central_cluster(asg, region)
        J_m, K_m = int(asg.bs_counts[m]), int(asg.user_counts[m])
        if J_m == 0 or K_m == 0:
            raise DegenerateScenarioError(
                f"central cluster {m} has {J_m} BSs and {K_m} users (seed {config.seed})")
        profile = build_profile(nodes, asg, m, config.fading)
    else:
        radius = config.D / (2.0 * math.sqrt(config.M))
        cell = Region("circle", 2.0 * radius)
        K_m = _user_count(config, beta, config.bs)
        if K_m == 0:
            raise DegenerateScenarioError(f"direct cluster has no users (seed {config.seed})")
        sigma = None if config.sigma is None else config.sigma / math.sqrt(config.M)
        nodes = sample_nodes(cell, config.bs, K_m, config.dist, config.seed, sigma)
        n_ring = K_m if config.ring_users is None else int(config.ring_users)
        ring = _annulus(rng_stream(config.seed, STREAM_RING), n_ring, radius, 2.0 * radius)
        users = np.vstack([nodes.user_positions, ring])
        members = np.arange(len(users)) < K_m
        profile = profile_from_positions(nodes.bs_positions, users, members, config.fading)
    return Scenario(tag, profile, beta, config.seed)


def _annulus(rng, n, r_in, r_out):
    r = np.sqrt(rng.uniform(r_in**2, r_out**2, n))
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def run_methods(config: ExperimentConfig, scenario: Scenario, methods=None,
                eta=None, N=None, workers=None) -> ScenarioResult:
    """Run the requested estimators with paired per-trial fading draws."""
    methods = methods or config.methods
    workers = config.workers if workers is None else workers
    res = ScenarioResult(scenario)
    for method in methods:
        if method == "mpm":
            res.estimates["mpm"] = estimate_capacity_mpm(
                scenario.profile, eta=config.eta if eta is None else eta,
                N=config.moments if N is None else N, trials=config.trials, seed=config.seed,
                power_iters=config.power_iters, nodes=config.nodes, workers=workers)
        else:
            res.estimates["cdm"] = estimate_capacity_cdm(
                scenario.profile, trials=config.trials, seed=config.seed, workers=workers)
    return res


def rows_for(config: ExperimentConfig, result: ScenarioResult) -> list[ReportRow]:
    sc = result.scenario
    rows = []
    for method in config.methods:
        est = result.estimates.get(method)
        if est is None:
            continue
        for t, value in enumerate(est.values):
            diag = est.diagnostics[t] if est.diagnostics else {}
            rows.append(ReportRow(
                scenario=sc.tag, J_m=sc.J_m, K_m=sc.K_m, beta=sc.profile.beta, method=method,
                trial=t, capacity=float(value) * config.log_scale,
                wall_time_s=diag.get("wall_time") if config.record_timing else None,
                seed=sc.seed, neg_density_frac=diag.get("neg_density_frac"),
                fit_residual=diag.get("fit_residual")))
    return rows


def run_experiment(config: ExperimentConfig) -> list[ReportRow]:
    """One paired scenario per configured beta; one row per (method, trial)."""
    rows = []
    for beta in config.beta:
        rows.extend(rows_for(config, run_methods(config, build_scenario(config, beta))))
    return rows


def compare(config: ExperimentConfig) -> list[ScenarioResult]:
    """Both methods on every configured beta, keeping the estimates."""
    cfg = replace(config, methods=METHODS)
    return [run_methods(cfg, build_scenario(cfg, beta)) for beta in cfg.beta]


@dataclass
class SweepRow:
    beta: float
    J_m: int
    K_m: int
    parameter: float
    cdm: float
    mpm: float
    rel_error: float


def eta_sweep(config: ExperimentConfig, etas=None) -> list[SweepRow]:
    """MPM error across eta values; one shared CDM reference per beta."""
    etas = config.etas if etas is None else etas
    out = []
    for beta in config.beta:
        sc = build_scenario(config, beta)
        cdm = run_methods(config, sc, methods=("cdm",)).estimates["cdm"]
        for eta in etas:
            mpm = run_methods(config, sc, methods=("mpm",), eta=eta).estimates["mpm"]
            out.append(SweepRow(sc.profile.beta, sc.J_m, sc.K_m, eta, cdm.value * config.log_scale,
                                mpm.value * config.log_scale, relative_error(mpm, cdm)))
    return out


def moments_sweep(config: ExperimentConfig, orders=None) -> list[SweepRow]:
    orders = config.orders if orders is None else orders
    out = []
    for beta in config.beta:
        sc = build_scenario(config, beta)
        cdm = run_methods(config, sc, methods=("cdm",)).estimates["cdm"]
        for N in orders:
            mpm = run_methods(config, sc, methods=("mpm",), N=N).estimates["mpm"]
            out.append(SweepRow(sc.profile.beta, sc.J_m, sc.K_m, N, cdm.value * config.log_scale,
                                mpm.value * config.log_scale, relative_error(mpm, cdm)))
    return out


@dataclass
class TimingRow:
    size: int
    method: str
    J_m: int
    K_m: int
    seconds: float  # median per-trial wall time
    samples: list[float]


def sweep_sizes(config: ExperimentConfig, sizes=None, mode: str = "direct") -> list[TimingRow]:
    """Median per-trial wall time of each method across cluster sizes.

    BLAS is pinned to one thread and trials run serially while timing.
    """
    sizes = tuple(config.sizes if sizes is None else sizes)
    beta = config.beta[0]
    rows = []
    with threadpool_limits(limits=1):
        for size in sizes:
            cfg = replace(config, bs=int(size), trials=config.timing_trials)
            sc = build_scenario(cfg, beta, mode=mode)
            for method in config.methods:
                samples = []
                for _ in range(config.reps):
                    t0 = time.perf_counter()
                    run_methods(cfg, sc, methods=(method,), workers=1)
                    samples.append((time.perf_counter() - t0) / cfg.trials)
                rows.append(TimingRow(int(size), method, sc.J_m, sc.K_m,
                                      statistics.median(samples), samples))
    return rows


def fit_complexity_slope(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    sizes = np.asarray(sizes, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(sizes) < 2 or len(sizes) != len(times):
        raise ParameterError("need at least two (size, time) pairs")
    if np.any(times <= 0) or np.any(sizes <= 0):
        raise ParameterError("sizes and times must be positive")
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


@dataclass
class MomentCheck:
    shape: tuple[int, int]
    theory: np.ndarray
    monte_carlo: np.ndarray

    @property
    def rel_error(self) -> np.ndarray:
        return np.abs(self.theory[1:] / self.monte_carlo[1:] - 1.0)


def monte_carlo_moments(Q, draws: int, seed: int, N: int = 3) -> np.ndarray:
    """Average of (1/p) tr(A^j), j = 0..N, over fading draws (via eigenvalues)."""
    Q = np.asarray(Q, dtype=float)
    p, n = Q.shape
    rng = rng_stream(seed, 0)
    acc = np.zeros(N + 1)
    for _ in range(draws):
        B = Q * sample_complex_gaussian(rng, p, n)
        lam = np.linalg.eigvalsh(B @ B.conj().T)
        acc += [np.mean(lam**j) for j in range(N + 1)]
    return acc / draws


def moments_check(seed: int = 1, profiles: int = 10, draws: int = 2000,
                  shapes=((20, 30), (30, 20))) -> list[MomentCheck]:
    """Closed-form moments against Monte-Carlo traces on random profiles."""
    rng = rng_stream(seed, 7)
    out = []
    for i in range(profiles):
        p, n = shapes[i % len(shapes)]
        Q = rng.uniform(0.1, 1.0, size=(p, n))
        theory = moments(theta_matrix(Q), 3).values
        out.append(MomentCheck((p, n), theory, monte_carlo_moments(Q, draws, seed + 1000 + i)))
    return out

