"""Random generation: GEM / Poisson-Dirichlet(1) draws, Ewens partitions,
size-biased picks, and reproducible per-replica random streams."""
from __future__ import annotations

import bisect
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .partitions import ContinuousPartition, IntegerPartition

DEFAULT_EPS_TRUNC = 1e-9
THREADS_ENV = "SPLITMERGE_THREADS"


@dataclass
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Backed by PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream_id,))``,
    so distinct stream ids give independent streams.  Owned by one worker at a
    time.
    """

    seed: int = 0
    stream_id: int = 0
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def random(self) -> float:
        return self.gen.random()

    def integers(self, low, high=None):
        return int(self.gen.integers(low, high))


def gem_sticks(rng: RngStream, eps_trunc: float = DEFAULT_EPS_TRUNC):
    """Unsorted stick-breaking pieces ``X_1, X_2, ...`` and the leftover stick.

    ``X_k = U_k Y_k`` and ``Y_{k+1} = Y_k - X_k`` with ``Y_1 = 1``; breaking
    stops as soon as the remaining stick drops below ``eps_trunc``.
    """
    if not 0.0 < eps_trunc < 1.0:
        raise ValueError("eps_trunc must lie in (0, 1)")
    rand = rng.gen.random
    sticks = []
    y = 1.0
    while y >= eps_trunc:
        x = rand() * y
        if x > 0.0:
            sticks.append(x)
        y -= x
    return sticks, y


def sample_gem(rng: RngStream, eps_trunc: float = DEFAULT_EPS_TRUNC) -> ContinuousPartition:
    """Truncated Poisson-Dirichlet(1) draw: sorted GEM sticks plus dust."""
    sticks, rest = gem_sticks(rng, eps_trunc)
    sticks.sort(reverse=True)
    return ContinuousPartition(tuple(sticks), rest)


def sample_ewens(n: int, rng: RngStream) -> IntegerPartition:
    """Cycle type of a uniform random permutation of ``n`` elements.

    Built by sequential insertion (Chinese restaurant with theta = 1):
    customer ``i`` opens a new table with probability ``1/i`` and otherwise
    sits next to a uniformly chosen earlier customer.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    gen = rng.gen
    table_of = np.empty(n, dtype=np.int64)
    sizes = []
    u = gen.random(n)
    picks = gen.integers(0, np.maximum(np.arange(n), 1))
    for i in range(n):
        if u[i] * (i + 1) < 1.0:
            table_of[i] = len(sizes)
            sizes.append(1)
        else:
            t = table_of[picks[i]]
            table_of[i] = t
            sizes[t] += 1
    return IntegerPartition.from_parts(sizes)


def size_biased_index(p: ContinuousPartition, u: float):
    """Index (0-based) of the part whose cumulative mass interval holds ``u``.

    Returns ``None`` when ``u`` lands in the dust.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    cum = p.cumulative
    j = bisect.bisect_right(cum, u)
    return j if j < len(cum) else None


def size_biased_pick(p: ContinuousPartition, rng: RngStream) -> int:
    """Size-biased index, redrawn while it lands in the dust."""
    if not p.parts:
        raise ValueError("cannot pick from a partition with no parts")
    while True:
        j = size_biased_index(p, rng.random())
        if j is not None:
            return j


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _run_replica(args):
    fn, seed, r, extra = args
    return fn(RngStream(seed, r), *extra)


def replica_map(fn, replicas: int, seed: int, *extra, workers: int | None = None) -> list:
    """Evaluate ``fn(RngStream(seed, r), *extra)`` for ``r = 0..replicas-1``.

    Results come back in replica order whatever the worker count, so outputs
    depend only on ``seed``.  ``fn`` must be picklable when more than one
    worker is used.
    """
    jobs = [(fn, seed, r, extra) for r in range(replicas)]
    nw = min(worker_count(workers), replicas) if replicas else 1
    if nw <= 1:
        return [_run_replica(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(_run_replica, jobs, chunksize=max(1, replicas // (4 * nw))))
