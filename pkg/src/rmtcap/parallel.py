"""Trial fan-out. Results always come back in trial order."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested: int | None = None) -> int:
    """Resolve the worker count; ``RMTCAP_THREADS`` wins over ``requested``.

    0 means one worker per CPU.
    """
    env = os.environ.get("RMTCAP_THREADS")
    n = int(env) if env not in (None, "") else (1 if requested is None else int(requested))
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def map_trials(fn, trials: int, workers: int = 1) -> list:
    n = max(1, int(workers))
    if n == 1 or trials == 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(trials)))
