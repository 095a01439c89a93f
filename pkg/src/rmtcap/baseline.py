"""Exact Monte-Carlo capacity by Cholesky log-det (the reference method)."""

from __future__ import annotations

import time

import numpy as np

from rmtcap.channel import ChannelProfile
from rmtcap.errors import ParameterError
from rmtcap.mpm import CapacityEstimate
from rmtcap.numkernel import logdet_i_plus_gram, sample_complex_gaussian, trial_stream
from rmtcap.parallel import map_trials


def estimate_capacity_cdm(profile: ChannelProfile, trials: int = 20, seed: int = 0,
                          workers: int = 1) -> CapacityEstimate:
    """Mean of ``log det(I + B B^H) / J_m`` over fading draws.

    Trial ``t`` draws its fading from ``trial_stream(seed, t)``, the same
    realisation the MPM estimator sees for that trial.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    start = time.perf_counter()
    Q = profile.Q
    J_m, K_m = Q.shape
    if J_m == 0:
        raise ParameterError("profile has no BSs")

    def one(t):
        t0 = time.perf_counter()
        if K_m == 0:
            return 0.0, 0.0
        B = Q * sample_complex_gaussian(trial_stream(seed, t), J_m, K_m)
        value = logdet_i_plus_gram(B) / J_m
        return value, time.perf_counter() - t0

    out = map_trials(one, trials, workers)
    return CapacityEstimate("cdm", np.array([v for v, _ in out]), time.perf_counter() - start,
                            seed, [{"wall_time": dt} for _, dt in out])


def relative_error(mpm: CapacityEstimate | float, cdm: CapacityEstimate | float) -> float:
    m = mpm.value if isinstance(mpm, CapacityEstimate) else float(mpm)
    c = cdm.value if isinstance(cdm, CapacityEstimate) else float(cdm)
    if c == 0:
        if m == 0:
            return 0.0
        raise ZeroDivisionError("relative error undefined: reference capacity is zero")
    return abs(m - c) / abs(c)
